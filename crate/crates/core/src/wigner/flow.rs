use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cross::{psi_at, FockSymbol, WignerField};
use super::grid::PhaseGrid;
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialSpec;
use crate::linalg::CMatrix;
use crate::quadrature::{integrate_vec, QuadConfig};

/// Largest imaginary part tolerated in `J_p`.
pub const JP_IMAG_LIMIT: f64 = 1e-10;

/// Wigner flow on a grid.
#[derive(Debug, Clone)]
pub struct FlowField {
    pub grid: PhaseGrid,
    pub jx: Vec<f64>,
    pub jp: Vec<f64>,
    /// `N_J = √(J_x² + J_p²)`.
    pub norm: Vec<f64>,
    pub jp_imag_residue: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct JpConfig {
    /// Absolute error target per grid row of the `ξ` integral.
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for JpConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_intervals: 4000 }
    }
}

/// `J_x = p W` (unit mass).
pub fn jx_field(w: &WignerField) -> Vec<f64> {
    let g = &w.grid;
    (0..g.nx).flat_map(|i| (0..g.np).map(move |j| (i, j))).map(|(i, j)| g.p(j) * w.at(i, j)).collect()
}

/// `[(V(x-ξ/2) - V(x)) - (V*(x+ξ/2) - V*(x))] / ξ` for `V = V_ε/2`, with the
/// `ξ → 0` limit `-Re V'(x)` taken from the one-sided derivatives.
pub fn jp_kernel(potential: &PotentialSpec, x: f64, xi: f64) -> Complex64 {
    let v = |y: f64| potential.hamiltonian_term(y);
    if xi == 0.0 {
        return match potential.derivative(1, x) {
            Ok(d) => Complex64::new(-0.5 * d.re, 0.0),
            Err(_) if x == 0.0 && potential.epsilon() == 1.0 => Complex64::new(0.0, 0.0),
            Err(_) => {
                let h = 1e-7;
                (jp_kernel(potential, x, h) + jp_kernel(potential, x, -h)) * 0.5
            }
        };
    }
    let vx = v(x);
    ((v(x - 0.5 * xi) - vx) - (v(x + 0.5 * xi) - vx).conj()) / xi
}

/// `J_p(x, p) = (1/2π) ∫ e^{iξp} ψ*(x+ξ/2) ψ(x-ξ/2) K(x, ξ) dξ` over
/// `|ξ| ≤ 2(|x| + 14)`. Each grid row is one vector-valued adaptive
/// integral, split where `x ± ξ/2` crosses the non-analytic point of `V`.
/// Returns the real part and the largest imaginary residue.
pub fn jp_field(
    coeffs: &[Complex64],
    potential: &PotentialSpec,
    grid: &PhaseGrid,
    cfg: JpConfig,
) -> Result<(Vec<f64>, f64)> {
    let ps = grid.ps();
    let n = coeffs.len();
    let rows: Vec<(Vec<f64>, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let cutoff = 2.0 * (x.abs() + 14.0);
            let mut breaks = vec![-cutoff, cutoff, 0.0, 2.0 * x, -2.0 * x];
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let mut buf = vec![0.0; n];
            let integrand = |xi: f64, out: &mut [Complex64]| {
                let g = psi_at(coeffs, x + 0.5 * xi, &mut buf).conj() * psi_at(coeffs, x - 0.5 * xi, &mut buf);
                let base = g * jp_kernel(potential, x, xi) / (2.0 * PI);
                for (o, p) in out.iter_mut().zip(&ps) {
                    *o = base * Complex64::cis(xi * p);
                }
            };
            let quad = QuadConfig { abs_tol: cfg.abs_tol, rel_tol: 0.0, max_intervals: cfg.max_intervals };
            let vals = integrate_vec(integrand, &breaks, ps.len(), quad)?;
            let residue = vals.iter().fold(0.0, |m: f64, v| m.max(v.im.abs()));
            Ok((vals.iter().map(|v| v.re).collect(), residue))
        })
        .collect::<Result<_>>()?;
    let residue = rows.iter().fold(0.0, |m: f64, r| m.max(r.1));
    if residue > JP_IMAG_LIMIT {
        return Err(Error::no_convergence(
            "jp_field",
            format!("imaginary residue {residue:.3e} above {JP_IMAG_LIMIT:.0e}"),
        ));
    }
    Ok((rows.into_iter().flat_map(|r| r.0).collect(), residue))
}

/// Position operator `(a + a†)/√2` in the first `dim` Fock states.
fn position_matrix(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, c| {
        if r + 1 == c || c + 1 == r {
            Complex64::new(((r.max(c)) as f64 / 2.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Truncated series `J_p = Σ_{j=1}^{j_max} [(-1)^j V^{(j)} - (V^{(j)})*] / (2^j j!) · (-i∂_p)^{j-1} W`
/// for polynomial potentials (even integer `ε`). The momentum derivatives
/// are exact: `(-i∂_p)^m W` is the Wigner symbol of `(-1)^m [x̂, ·]^m ρ`, and
/// the basis is padded so the commutators are not truncated.
pub fn jp_series(coeffs: &[Complex64], potential: &PotentialSpec, grid: &PhaseGrid, j_max: usize) -> Result<Vec<f64>> {
    if !potential.is_even_integer() {
        return Err(Error::Precondition(format!(
            "series form needs a polynomial potential (even integer epsilon), got {}",
            potential.epsilon()
        )));
    }
    if j_max == 0 {
        return Err(Error::InvalidInput("j_max must be at least 1".into()));
    }
    let n = coeffs.len();
    let dim = n + j_max;
    let x_op = position_matrix(dim);
    let mut sigma = CMatrix::from_fn(dim, dim, |l, k| {
        if l < n && k < n {
            coeffs[l] * coeffs[k].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut symbols = Vec::with_capacity(j_max);
    for m in 0..j_max {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        symbols.push(FockSymbol::from_operator(&CMatrix::from_fn(dim, dim, |r, c| sigma[(r, c)] * sign)));
        let xs = x_op.matmul(&sigma);
        let sx = sigma.matmul(&x_op);
        sigma = CMatrix::from_fn(dim, dim, |r, c| xs[(r, c)] - sx[(r, c)]);
    }
    let ps = grid.ps();
    let rows: Vec<Vec<f64>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let weights: Vec<Complex64> = (1..=j_max)
                .map(|j| {
                    let d = potential.derivative(j as u32, x).expect("polynomial derivatives exist") * 0.5;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let fact: f64 = (1..=j).map(|k| k as f64).product();
                    (d * sign - d.conj()) / (2f64.powi(j as i32) * fact)
                })
                .collect();
            ps.iter()
                .map(|&p| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (wgt, s) in weights.iter().zip(&symbols) {
                        if *wgt != Complex64::new(0.0, 0.0) {
                            acc += wgt * s.eval(x, p);
                        }
                    }
                    acc.re
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `J_x` from the field and `J_p` by the `ξ` integral, with `N_J`.
pub fn flow_field(
    w: &WignerField,
    coeffs: &[Complex64],
    potential: &PotentialSpec,
    cfg: JpConfig,
) -> Result<FlowField> {
    let jx = jx_field(w);
    let (jp, jp_imag_residue) = jp_field(coeffs, potential, &w.grid, cfg)?;
    let norm = jx.iter().zip(&jp).map(|(a, b)| a.hypot(*b)).collect();
    Ok(FlowField { grid: w.grid, jx, jp, norm, jp_imag_residue })
}
