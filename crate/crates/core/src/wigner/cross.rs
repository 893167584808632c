use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::PhaseGrid;
use crate::error::{Error, Result};
use crate::linalg::{norm2, CMatrix};
use crate::specfun::{ln_factorial, oscillator_functions, MAX_FOCK_INDEX};

/// Largest imaginary part tolerated in a Wigner function before it is
/// discarded.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-12;

const RESCALE: f64 = 1e150;

#[inline]
fn emit(g: f64, log_scale: f64, factor: f64) -> f64 {
    if log_scale > -700.0 || g == 0.0 {
        g * factor
    } else {
        g.signum() * (g.abs().ln() + log_scale).exp()
    }
}

#[inline]
fn column_log_scale_with(d: usize, t: f64, ln_fact_d: f64) -> f64 {
    if d == 0 {
        -0.5 * t
    } else {
        0.5 * d as f64 * t.ln() - 0.5 * t - 0.5 * ln_fact_d
    }
}

fn column_log_scale(d: usize, t: f64) -> f64 {
    column_log_scale_with(d, t, ln_factorial(d as u32))
}

/// Fills `out[k] = √(k!/(k+d)!) t^{d/2} e^{-t/2} L_k^{(d)}(t)` for
/// `k = 0..out.len()` through the normalized Laguerre recurrence
/// `g_{k+1} = ((2k+1+d-t) g_k - √(k(k+d)) g_{k-1}) / √((k+1)(k+1+d))`.
fn laguerre_column(d: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let df = d as f64;
    let mut log_scale = column_log_scale(d, t);
    if log_scale == f64::NEG_INFINITY {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = emit(cur, log_scale, factor);
    for k in 0..out.len() - 1 {
        let kf = k as f64;
        let denom = ((kf + 1.0) * (kf + 1.0 + df)).sqrt();
        let next = ((2.0 * kf + 1.0 + df - t) * cur - (kf * (kf + df)).sqrt() * prev) / denom;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
            factor = log_scale.exp();
        }
        out[k + 1] = emit(cur, log_scale, factor);
    }
}

/// Node-independent data for evaluating the Wigner symbol
/// `Σ_{k,l} σ_{lk} W_{kl}(x, p)` of an operator `σ` on the first `n` Fock
/// states: for every diagonal offset `d`, the products `(-1)^k σ_{k+d,k}/π`
/// and `(-1)^k σ_{k,k+d}/π`, and the Laguerre recurrence coefficients.
/// Both triangles are summed separately even for Hermitian `σ`, so the
/// imaginary part of a Wigner function is a genuine rounding residue.
#[derive(Debug, Clone)]
pub struct FockSymbol {
    n: usize,
    lower: Vec<Vec<Complex64>>,
    upper: Vec<Vec<Complex64>>,
    a_shift: Vec<Vec<f64>>,
    inv_den: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    ln_fact: Vec<f64>,
}

impl FockSymbol {
    fn build(n: usize, entry: impl Fn(usize, usize) -> Complex64) -> Self {
        let band = |row_offset: bool| -> Vec<Vec<Complex64>> {
            (0..n)
                .map(|d| {
                    (0..n - d)
                        .map(|k| {
                            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                            let v = if row_offset { entry(k + d, k) } else { entry(k, k + d) };
                            v * (sign / PI)
                        })
                        .collect()
                })
                .collect()
        };
        let mut a_shift = Vec::with_capacity(n);
        let mut inv_den = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for d in 0..n {
            let df = d as f64;
            let len = n - d;
            a_shift.push((0..len).map(|k| 2.0 * k as f64 + 1.0 + df).collect());
            inv_den.push((0..len).map(|k| 1.0 / (((k + 1) as f64) * ((k + 1) as f64 + df)).sqrt()).collect());
            b.push((0..len).map(|k| (k as f64 * (k as f64 + df)).sqrt()).collect());
        }
        let ln_fact = (0..n).map(|d| ln_factorial(d as u32)).collect();
        Self { n, lower: band(true), upper: band(false), a_shift, inv_den, b, ln_fact }
    }

    /// Symbol of `|ψ⟩⟨ψ|` for `ψ = Σ c_k u_k`, i.e. the Wigner function.
    pub fn from_state(coeffs: &[Complex64]) -> Self {
        Self::build(coeffs.len(), |l, k| coeffs[l] * coeffs[k].conj())
    }

    pub fn from_operator(sigma: &CMatrix) -> Self {
        Self::build(sigma.rows(), |l, k| sigma[(l, k)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Value at `(x, p)`. For Hermitian symbols the result is real up to
    /// the rounding residue left in the imaginary part.
    pub fn eval(&self, x: f64, p: f64) -> Complex64 {
        let t = 2.0 * (x * x + p * p);
        let r = (0.5 * t).sqrt();
        let step = if r > 0.0 { Complex64::new(x / r, -p / r) } else { Complex64::new(1.0, 0.0) };
        let mut phase = Complex64::new(1.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        for d in 0..self.n {
            if d > 0 {
                phase *= step;
                if t == 0.0 {
                    break;
                }
            }
            let mut log_scale = column_log_scale_with(d, t, self.ln_fact[d]);
            let mut factor = log_scale.exp();
            let (a_shift, inv_den, b) = (&self.a_shift[d], &self.inv_den[d], &self.b[d]);
            let (lower, upper) = (&self.lower[d], &self.upper[d]);
            let mut prev = 0.0;
            let mut cur = 1.0;
            let g0 = emit(cur, log_scale, factor);
            let mut s_lower = lower[0] * g0;
            let mut s_upper = upper[0] * g0;
            for k in 0..lower.len() - 1 {
                let next = ((a_shift[k] - t) * cur - b[k] * prev) * inv_den[k];
                prev = cur;
                cur = next;
                if cur.abs() > RESCALE {
                    prev /= RESCALE;
                    cur /= RESCALE;
                    log_scale += RESCALE.ln();
                    factor = log_scale.exp();
                }
                let g = emit(cur, log_scale, factor);
                s_lower += lower[k + 1] * g;
                s_upper += upper[k + 1] * g;
            }
            // X_{k,k+d} = (-1)^k g e^{-idθ}/π pairs with σ_{k+d,k}; its
            // conjugate X_{k+d,k} pairs with σ_{k,k+d}
            if d == 0 {
                total += s_lower;
            } else {
                total += phase * s_lower + phase.conj() * s_upper;
            }
        }
        total
    }
}

/// `(1/2π) ∫ u_k(x+ξ/2) u_l(x-ξ/2) e^{iξp} dξ` in closed form:
/// for `k ≤ l`, `d = l - k`, `t = 2(x² + p²)` and `θ = atan2(p, x)`,
/// `((-1)^k / π) √(k!/l!) t^{d/2} e^{-t/2} L_k^{(d)}(t) e^{-idθ}`, and
/// the conjugate for `k > l`.
pub fn cross_wigner_fock(k: usize, l: usize, x: f64, p: f64) -> Complex64 {
    let (lo, hi) = (k.min(l), k.max(l));
    let d = hi - lo;
    let t = 2.0 * (x * x + p * p);
    let mut col = vec![0.0; lo + 1];
    laguerre_column(d, t, &mut col);
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    let v = Complex64::from_polar(sign * col[lo] / PI, -(d as f64) * p.atan2(x));
    if k <= l {
        v
    } else {
        v.conj()
    }
}

fn check_coeffs(coeffs: &[Complex64]) -> Result<()> {
    if coeffs.is_empty() || coeffs.len() > MAX_FOCK_INDEX + 1 {
        return Err(Error::InvalidInput(format!(
            "coefficient vector length {} outside [1, {}]",
            coeffs.len(),
            MAX_FOCK_INDEX + 1
        )));
    }
    let norm = norm2(coeffs);
    if !((norm - 1.0).abs() <= 1e-10) {
        return Err(Error::Precondition(format!("coefficient vector has norm {norm}, expected 1")));
    }
    Ok(())
}

/// Wigner function of `Σ c_k u_k` at one point, before the imaginary part
/// is dropped.
pub fn wigner_at(coeffs: &[Complex64], x: f64, p: f64) -> Complex64 {
    FockSymbol::from_state(coeffs).eval(x, p)
}

/// Wigner symbol `Σ_{k,l} σ_{lk} W_{kl}(x, p)` of an operator given by its
/// Fock matrix; real when `σ` is Hermitian.
pub fn wigner_operator_at(sigma: &CMatrix, x: f64, p: f64) -> Complex64 {
    FockSymbol::from_operator(sigma).eval(x, p)
}

/// Wigner function of a stationary state on a grid, at `t = 0`.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    /// Energy of the source state; `Im E` sets `∂W/∂t = 2 Im(E) W`.
    pub energy: Complex64,
    /// Largest discarded imaginary part.
    pub imag_residue: f64,
}

impl WignerField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn integral(&self) -> f64 {
        self.grid.simpson_integral(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn boundary_max(&self) -> f64 {
        self.grid.boundary_max(&self.values)
    }
}

/// `W(x, p) = Σ_{k,l} c̄_k c_l W_{kl}(x, p)` on every node of `grid`.
pub fn wigner_from_coeffs(coeffs: &[Complex64], energy: Complex64, grid: &PhaseGrid) -> Result<WignerField> {
    check_coeffs(coeffs)?;
    let symbol = FockSymbol::from_state(coeffs);
    let rows: Vec<(Vec<f64>, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut residue: f64 = 0.0;
            let row = (0..grid.np)
                .map(|j| {
                    let w = symbol.eval(x, grid.p(j));
                    residue = residue.max(w.im.abs());
                    w.re
                })
                .collect();
            (row, residue)
        })
        .collect();
    let imag_residue = rows.iter().fold(0.0, |m: f64, r| m.max(r.1));
    if imag_residue > IMAG_RESIDUE_LIMIT {
        return Err(Error::Precondition(format!(
            "Wigner function has imaginary residue {imag_residue:.3e} above {IMAG_RESIDUE_LIMIT:.0e}"
        )));
    }
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(WignerField { grid: *grid, values, energy, imag_residue })
}

/// `ψ(y) = Σ c_k u_k(y)`; `buf` is scratch of length `coeffs.len()`.
pub fn psi_at(coeffs: &[Complex64], y: f64, buf: &mut [f64]) -> Complex64 {
    oscillator_functions(y, buf);
    coeffs.iter().zip(buf.iter()).map(|(c, u)| c * u).sum()
}

/// Direct trapezoid evaluation of `(1/2π) ∫ ψ*(x+ξ/2) ψ(x-ξ/2) e^{iξp} dξ`
/// over `|ξ| ≤ 2(|x| + 14)`, halving the step until the result moves by
/// less than `1e-10`.
pub fn wigner_quad(coeffs: &[Complex64], x: f64, p: f64) -> Result<f64> {
    check_coeffs(coeffs)?;
    let mut buf = vec![0.0; coeffs.len()];
    let mut integrand = |xi: f64| {
        let a = psi_at(coeffs, x + 0.5 * xi, &mut buf).conj();
        let b = psi_at(coeffs, x - 0.5 * xi, &mut buf);
        a * b * Complex64::from_polar(1.0 / (2.0 * PI), xi * p)
    };
    let cutoff = 2.0 * (x.abs() + 14.0);
    let mut n = 128usize;
    let mut h = 2.0 * cutoff / n as f64;
    let mut sum: Complex64 = (0..=n)
        .map(|m| {
            let w = if m == 0 || m == n { 0.5 } else { 1.0 };
            integrand(-cutoff + m as f64 * h) * w
        })
        .sum();
    let mut value = sum * h;
    while n < 1 << 20 {
        let fresh: Complex64 = (0..n).map(|m| integrand(-cutoff + (m as f64 + 0.5) * h)).sum();
        sum += fresh;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        let delta = (next - value).norm();
        value = next;
        if delta < 1e-10 && n >= 512 {
            return Ok(value.re);
        }
    }
    Err(Error::no_convergence("wigner_quad", format!("trapezoid sum at ({x}, {p}) not settled with 2^20 steps")))
}
