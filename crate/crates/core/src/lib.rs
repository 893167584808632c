//! Numerical toolkit for the PT-symmetric oscillator family
//! `H(ε) = -½ d²/dx² + ½ V_ε(x)`, `V_ε(x) = -(ix)^ε`.
//!
//! The crate assembles the Hamiltonian in the oscillator (Fock) basis from
//! closed-form matrix elements, diagonalizes it, and studies the
//! eigenstates in phase space through their Wigner functions, the Wigner
//! flow and its circulation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod summation;
pub mod wigner;

pub use error::{Error, Result};
