use num_complex::Complex64;

use super::cross::{psi_at, wigner_from_coeffs, WignerField};
use super::flow::FlowField;
use super::grid::PhaseGrid;
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialSpec;
use crate::quadrature::{integrate_pieces, integrate_vec, simpson_weights, QuadConfig};
use crate::summation::NeumaierSum;

/// Support check threshold for flux integrals.
pub const SUPPORT_LIMIT: f64 = 1e-10;

/// Fourth-order first derivative along one axis: central in the interior,
/// one-sided on the two outermost nodes at each end.
fn derivative_4th(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(n >= 5);
    let s = 12.0 * h;
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / s;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / s;
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / s;
    }
    out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / s;
    out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / s;
}

#[derive(Debug, Clone)]
pub struct ContinuityResidual {
    /// `2 Im(E) W + ∂_x J_x + ∂_p J_p - 2 Im(V) W` at every node.
    pub values: Vec<f64>,
    /// Max-norm over nodes at least two away from the boundary.
    pub interior_max: f64,
}

/// Pointwise balance of the continuity equation for a stationary state,
/// `∂W/∂t = 2 Im(E) W`, with fourth-order finite differences.
pub fn continuity_residual(w: &WignerField, flow: &FlowField, potential: &PotentialSpec) -> Result<ContinuityResidual> {
    let g = w.grid;
    if flow.grid != g {
        return Err(Error::InvalidInput("Wigner field and flow live on different grids".into()));
    }
    let (nx, np) = (g.nx, g.np);
    let mut values = vec![0.0; g.len()];
    let mut line = vec![0.0; nx.max(np)];
    let mut deriv = vec![0.0; nx.max(np)];
    for j in 0..np {
        for i in 0..nx {
            line[i] = flow.jx[g.index(i, j)];
        }
        derivative_4th(&line[..nx], g.hx(), &mut deriv[..nx]);
        for i in 0..nx {
            values[g.index(i, j)] += deriv[i];
        }
    }
    for i in 0..nx {
        let row = &flow.jp[g.index(i, 0)..g.index(i, 0) + np];
        derivative_4th(row, g.hp(), &mut deriv[..np]);
        let im_v = potential.hamiltonian_term(g.x(i)).im;
        for j in 0..np {
            let k = g.index(i, j);
            values[k] += deriv[j] + 2.0 * (w.energy.im - im_v) * w.values[k];
        }
    }
    let mut interior_max: f64 = 0.0;
    for i in 2..nx - 2 {
        for j in 2..np - 2 {
            interior_max = interior_max.max(values[g.index(i, j)].abs());
        }
    }
    Ok(ContinuityResidual { values, interior_max })
}

/// `2 W(x, p) Im V(x)`; the field must have decayed below
/// [`SUPPORT_LIMIT`] on the grid boundary.
pub fn flux_density(w: &WignerField, potential: &PotentialSpec) -> Result<Vec<f64>> {
    let boundary = w.boundary_max();
    if boundary >= SUPPORT_LIMIT {
        return Err(Error::Precondition(format!(
            "grid does not cover the state: boundary max |W| = {boundary:.3e}, need < {SUPPORT_LIMIT:.0e}"
        )));
    }
    let g = w.grid;
    Ok((0..g.nx)
        .flat_map(|i| {
            let im_v = potential.hamiltonian_term(g.x(i)).im;
            (0..g.np).map(move |j| (i, j, im_v))
        })
        .map(|(i, j, im_v)| 2.0 * w.at(i, j) * im_v)
        .collect())
}

/// `∬ 2 W Im V dx dp` by 2D Simpson.
pub fn flux(w: &WignerField, potential: &PotentialSpec) -> Result<f64> {
    Ok(w.grid.simpson_integral(&flux_density(w, potential)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculationConfig {
    pub r_init: f64,
    /// Target node spacing of the first pass; halved on every pass.
    pub h_init: f64,
    /// Subtract `∬ ∂W/∂t = 2 Im(E) ∬ W`.
    pub include_dwdt: bool,
    pub tol: f64,
    pub r_limit: f64,
}

impl Default for CirculationConfig {
    fn default() -> Self {
        Self { r_init: 5.0, h_init: 0.2, include_dwdt: false, tol: 1e-8, r_limit: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculationResult {
    pub epsilon: f64,
    pub state_index: usize,
    pub domain_half_width: f64,
    pub value: f64,
    /// `(R, nodes per axis, value)` for every pass.
    pub growth_history: Vec<(f64, usize, f64)>,
    pub include_dwdt: bool,
}

/// Weights `ω_s = ∫ 2 Im V(x) L_s(x) dx` for the degree-6 Lagrange basis on
/// seven equispaced nodes starting at `a`.
fn product_panel_weights(potential: &PotentialSpec, a: f64, h: f64) -> Result<[f64; 7]> {
    let b = a + 6.0 * h;
    let mut breaks = vec![a, b];
    if a < 0.0 && b > 0.0 {
        breaks.insert(1, 0.0);
    }
    let f = |x: f64, out: &mut [Complex64]| {
        let u = (x - a) / h;
        let weight = 2.0 * potential.hamiltonian_term(x).im;
        for (s, o) in out.iter_mut().enumerate() {
            let mut l = 1.0;
            for r in 0..7 {
                if r != s {
                    l *= (u - r as f64) / (s as f64 - r as f64);
                }
            }
            *o = Complex64::new(weight * l, 0.0);
        }
    };
    let scale = potential.hamiltonian_term(a.abs().max(b.abs())).norm().max(1.0) * 6.0 * h;
    let cfg = QuadConfig { abs_tol: 1e-14 * scale, rel_tol: 0.0, max_intervals: 2000 };
    let v = integrate_vec(f, &breaks, 7, cfg)?;
    let mut w = [0.0; 7];
    for (wi, vi) in w.iter_mut().zip(&v) {
        *wi = vi.re;
    }
    Ok(w)
}

/// One pass on `[-R, R]²`: Simpson in `p`, and in `x` a product rule that
/// integrates the kink of `Im V` at the origin exactly against a degree-6
/// interpolant of the `p`-marginal.
fn circulation_pass(
    coeffs: &[Complex64],
    energy: Complex64,
    potential: &PotentialSpec,
    r: f64,
    h: f64,
    include_dwdt: bool,
) -> Result<(usize, f64)> {
    let intervals = (12.0 * (2.0 * r / (12.0 * h)).ceil()) as usize;
    let grid = PhaseGrid::square(r, intervals + 1)?;
    let w = wigner_from_coeffs(coeffs, energy, &grid)?;
    let hx = grid.hx();
    let wp = simpson_weights(grid.np, grid.hp())?;
    let marginal: Vec<f64> = (0..grid.nx)
        .map(|i| {
            let mut acc = NeumaierSum::new();
            for (j, wj) in wp.iter().enumerate() {
                acc.add(wj * w.at(i, j));
            }
            acc.value()
        })
        .collect();
    let mut source = NeumaierSum::new();
    for panel in 0..intervals / 6 {
        let first = 6 * panel;
        let weights = product_panel_weights(potential, grid.x(first), hx)?;
        for (s, ws) in weights.iter().enumerate() {
            source.add(ws * marginal[first + s]);
        }
    }
    let mut value = source.value();
    if include_dwdt {
        let wx = simpson_weights(grid.nx, hx)?;
        let mass: f64 = NeumaierSum::from_iter(wx.iter().zip(&marginal).map(|(a, b)| a * b)).value();
        value -= 2.0 * energy.im * mass;
    }
    Ok((grid.nx, value))
}

/// `∬_{[-R,R]²} (2 W Im V - ∂W/∂t) dx dp`, enlarging `R` by 2 and halving
/// the spacing until consecutive passes agree within `cfg.tol`.
pub fn circulation(
    coeffs: &[Complex64],
    energy: Complex64,
    potential: &PotentialSpec,
    state_index: usize,
    cfg: CirculationConfig,
) -> Result<CirculationResult> {
    if !(cfg.r_init >= 5.0) {
        return Err(Error::InvalidInput(format!("initial half-width {} below 5", cfg.r_init)));
    }
    if !(cfg.h_init > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::InvalidInput("spacing and tolerance must be positive".into()));
    }
    let mut history = Vec::new();
    let (mut r, mut h) = (cfg.r_init, cfg.h_init);
    while r <= cfg.r_limit {
        let (nodes, value) = circulation_pass(coeffs, energy, potential, r, h, cfg.include_dwdt)?;
        history.push((r, nodes, value));
        if let [.., (_, _, prev), _] = history.as_slice() {
            if (value - prev).abs() <= cfg.tol {
                return Ok(CirculationResult {
                    epsilon: potential.epsilon(),
                    state_index,
                    domain_half_width: r,
                    value,
                    growth_history: history,
                    include_dwdt: cfg.include_dwdt,
                });
            }
        }
        r += 2.0;
        h *= 0.5;
    }
    Err(Error::no_convergence(
        "circulation",
        format!("domain growth did not settle within R = {}; history {history:?}", cfg.r_limit),
    ))
}

/// Independent 1D evaluation of the same quantity: integrating `W` over
/// `p` leaves `|ψ(x)|²`, so `C = ∫ 2 Im V |ψ|² dx - 2 Im(E) ∫ |ψ|² dx`.
pub fn circulation_oracle(
    coeffs: &[Complex64],
    energy: Complex64,
    potential: &PotentialSpec,
    include_dwdt: bool,
) -> Result<f64> {
    let mut buf = vec![0.0; coeffs.len()];
    let half = 12.0 + (coeffs.len() as f64).sqrt() + 6.0;
    let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-13, max_intervals: 20_000 };
    let source = integrate_pieces(
        |x| Complex64::new(2.0 * potential.hamiltonian_term(x).im * psi_at(coeffs, x, &mut buf).norm_sqr(), 0.0),
        &[-half, 0.0, half],
        cfg,
    )?
    .value
    .re;
    if !include_dwdt {
        return Ok(source);
    }
    let mut buf = vec![0.0; coeffs.len()];
    let mass =
        integrate_pieces(|x| Complex64::new(psi_at(coeffs, x, &mut buf).norm_sqr(), 0.0), &[-half, 0.0, half], cfg)?
            .value
            .re;
    Ok(source - 2.0 * energy.im * mass)
}
