//! Special-function kernel: Hermite polynomials and oscillator
//! eigenfunctions, Gamma-family helpers, terminating Lauricella `F_A` and the
//! half-line Hermite product integrals built on it.

mod erdelyi;
mod gamma;
mod hermite;
mod lauricella;

pub use erdelyi::{erdelyi_halfline, erdelyi_halfline_scaled};
pub use gamma::{double_factorial, gamma, ln_factorial, log_gamma, pochhammer};
pub use hermite::{hermite_poly, oscillator_eigenfunction, oscillator_functions, HERMITE_SAFE_ABS_X, MAX_FOCK_INDEX};
pub use lauricella::{lauricella_fa2, lauricella_fa2_scaled, LauricellaArgs, MAX_TERMINATING_ORDER};

/// A real number stored as sign and natural-log magnitude, so that products
/// of factorial-sized prefactors never overflow before they are combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or +1
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0.0, ln_abs: f64::NEG_INFINITY };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { sign: v.signum(), ln_abs: v.abs().ln() }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    /// Multiplies by `sign * exp(ln_factor)`.
    pub fn scale(self, sign: f64, ln_factor: f64) -> Self {
        if self.sign == 0.0 || sign == 0.0 {
            Self::ZERO
        } else {
            Self { sign: self.sign * sign, ln_abs: self.ln_abs + ln_factor }
        }
    }
}
