//! The potential family `V_ε(x) = -|x|^ε [cos(επ/2) + i sgn(x) sin(επ/2)]`
//! and the truncated Fock-basis matrix of `H(ε) = -½ d²/dx² + ½ V_ε(x)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quadrature::{integrate_pieces, QuadConfig};
use crate::specfun::{erdelyi_halfline_scaled, ln_factorial, oscillator_functions, MAX_FOCK_INDEX};

pub const MIN_BASIS: usize = 8;
pub const MAX_BASIS: usize = MAX_FOCK_INDEX;
pub const DEFAULT_BASIS: usize = 71;

/// `(sin(επ/2), cos(επ/2))`, exact when `ε` is an integer.
pub fn sincos_half_pi(eps: f64) -> (f64, f64) {
    if eps.fract() == 0.0 && eps.abs() < 1e15 {
        match (eps as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        (eps * std::f64::consts::FRAC_PI_2).sin_cos()
    }
}

/// Member `ε` of the potential family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    epsilon: f64,
    sin: f64,
    cos: f64,
}

impl PotentialSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::domain("PotentialSpec", format!("epsilon = {epsilon} must be positive and finite")));
        }
        let (sin, cos) = sincos_half_pi(epsilon);
        Ok(Self { epsilon, sin, cos })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// True when `ε` is an even integer, i.e. `V` is the polynomial `±x^ε`.
    pub fn is_even_integer(&self) -> bool {
        self.epsilon.fract() == 0.0 && (self.epsilon as i64) % 2 == 0
    }

    /// `V_ε(x)`, with `V_ε(0) = 0`.
    pub fn eval(&self, x: f64) -> Complex64 {
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mag = x.abs().powf(self.epsilon);
        Complex64::new(-mag * self.cos, -x.signum() * mag * self.sin)
    }

    /// The potential term of the Hamiltonian, `V_ε(x) / 2`.
    pub fn hamiltonian_term(&self, x: f64) -> Complex64 {
        self.eval(x) * 0.5
    }

    /// `d^j V_ε / dx^j` at `x ≠ 0`; at `x = 0` this is the common value of
    /// both one-sided derivatives when `j < ε`, and an error otherwise unless
    /// `V` is a polynomial.
    pub fn derivative(&self, j: u32, x: f64) -> Result<Complex64> {
        if j == 0 {
            return Ok(self.eval(x));
        }
        let falling = (0..j).fold(1.0, |acc, k| acc * (self.epsilon - k as f64));
        if x == 0.0 {
            if (j as f64) < self.epsilon || falling == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if self.is_even_integer() && j as f64 == self.epsilon {
                // V = -cos(επ/2) x^ε exactly
                return Ok(Complex64::new(-self.cos * falling, 0.0));
            }
            return Err(Error::domain(
                "PotentialSpec::derivative",
                format!("order {j} derivative of |x|^{} does not exist at 0", self.epsilon),
            ));
        }
        let mag = falling * x.abs().powf(self.epsilon - j as f64);
        // d/dx |x|^a = sgn(x) a |x|^{a-1}
        let parity = if x < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
        let re = -self.cos * mag * parity;
        let im = -x.signum() * self.sin * mag * parity;
        Ok(Complex64::new(re, im))
    }
}

/// Free-function form of [`PotentialSpec::eval`].
pub fn potential_eval(spec: &PotentialSpec, x: f64) -> Complex64 {
    spec.eval(x)
}

/// `⟨m| -½ d²/dx² |n⟩`.
pub fn kinetic_element(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    if m == n {
        (2.0 * nf + 1.0) / 4.0
    } else if m + 2 == n {
        -(nf * (nf - 1.0)).sqrt() / 4.0
    } else if m == n + 2 {
        -((nf + 1.0) * (nf + 2.0)).sqrt() / 4.0
    } else {
        0.0
    }
}

fn ln_norm(k: usize) -> f64 {
    -0.5 * (k as f64 * std::f64::consts::LN_2 + ln_factorial(k as u32) + 0.5 * std::f64::consts::PI.ln())
}

/// `⟨m| V_ε/2 |n⟩` from the half-line Hermite integrals.
///
/// Splitting at 0, the even part `-cos(επ/2)|x|^ε` couples equal-parity
/// pairs and the odd part `-i sin(επ/2) sgn(x)|x|^ε` couples opposite-parity
/// pairs; either way the full-line integral is twice the half-line one.
pub fn potential_element_closed(n: usize, m: usize, eps: f64) -> Result<Complex64> {
    let spec = PotentialSpec::new(eps)?;
    let (sin, cos) = (spec.sin, spec.cos);
    let same_parity = (n + m).is_multiple_of(2);
    let trig = if same_parity { cos } else { sin };
    if trig == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integral = erdelyi_halfline_scaled(n, m, eps)?;
    let magnitude = integral.scale(1.0, ln_norm(n) + ln_norm(m)).value();
    let v = -trig * magnitude;
    Ok(if same_parity { Complex64::new(v, 0.0) } else { Complex64::new(0.0, v) })
}

/// `⟨m| V_ε/2 |n⟩` by adaptive quadrature over `[-X, X]`, `X = 12 + √(n+m)`,
/// split at the non-analytic point `x = 0`.
pub fn potential_element_quad(n: usize, m: usize, eps: f64) -> Result<Complex64> {
    if n > MAX_BASIS || m > MAX_BASIS {
        return Err(Error::domain("potential_element_quad", format!("indices ({n}, {m}) exceed {MAX_BASIS}")));
    }
    let spec = PotentialSpec::new(eps)?;
    let top = n.max(m);
    let mut u = vec![0.0; top + 1];
    let f = |x: f64| {
        oscillator_functions(x, &mut u);
        spec.hamiltonian_term(x) * (u[n] * u[m])
    };
    let half = 12.0 + ((n + m) as f64).sqrt();
    let cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 0.0, max_intervals: 20_000 };
    integrate_pieces(f, &[-half, 0.0, half], cfg).map(|r| r.value)
}

/// Dense `n_max × n_max` Fock-basis matrix of `H(ε)`; symmetric, and
/// Hermitian only for even integer `ε`.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub epsilon: f64,
    pub n_max: usize,
    pub entries: CMatrix,
}

impl HamiltonianMatrix {
    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec::new(self.epsilon).expect("validated at assembly")
    }
}

/// Assembles `H(ε)` in the first `n_max` Fock states. Entries are computed
/// for `n ≤ m` and mirrored.
pub fn assemble(eps: f64, n_max: usize) -> Result<HamiltonianMatrix> {
    if !(MIN_BASIS..=MAX_BASIS).contains(&n_max) {
        return Err(Error::InvalidInput(format!("n_max = {n_max} outside [{MIN_BASIS}, {MAX_BASIS}]")));
    }
    PotentialSpec::new(eps)?;
    let pairs: Vec<(usize, usize)> = (0..n_max).flat_map(|n| (n..n_max).map(move |m| (n, m))).collect();
    let values: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(n, m)| potential_element_closed(n, m, eps).map(|v| v + kinetic_element(n, m)))
        .collect::<Result<_>>()?;
    let mut entries = CMatrix::zeros(n_max, n_max);
    for (&(n, m), &v) in pairs.iter().zip(&values) {
        entries[(m, n)] = v;
        entries[(n, m)] = v;
    }
    Ok(HamiltonianMatrix { epsilon: eps, n_max, entries })
}
