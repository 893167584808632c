//! Phase-space picture of the eigenstates: Wigner functions, the Wigner
//! flow `(J_x, J_p)`, the continuity balance, flux and circulation, and
//! reflection-symmetry diagnostics.
//!
//! Fields are `t = 0` snapshots on a [`PhaseGrid`], stored row-major with
//! `x` as the slow index. The potential entering every flow quantity is the
//! one in the Hamiltonian, `V_ε / 2`.

mod balance;
mod cross;
mod flow;
mod grid;
mod symmetry;

pub use balance::{
    circulation, circulation_oracle, continuity_residual, flux, flux_density, CirculationConfig, CirculationResult,
    ContinuityResidual,
};
pub use cross::{
    cross_wigner_fock, psi_at, wigner_at, wigner_from_coeffs, wigner_operator_at, wigner_quad, FockSymbol, WignerField,
    IMAG_RESIDUE_LIMIT,
};
pub use flow::{flow_field, jp_field, jp_kernel, jp_series, jx_field, FlowField, JpConfig};
pub use grid::PhaseGrid;
pub use symmetry::{symmetry_diagnostics, SymmetryReport};
