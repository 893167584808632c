//! Oracle cross-checks run by the `validate` command.

use ptwigner_core::hamiltonian::{potential_element_closed, potential_element_quad, PotentialSpec};
use ptwigner_core::spectrum::{self, Spectrum};
use ptwigner_core::wigner::{
    circulation, circulation_oracle, flow_field, symmetry_diagnostics, wigner_at, wigner_from_coeffs, wigner_quad,
    CirculationConfig, JpConfig, PhaseGrid, WignerField,
};
use serde_json::json;

use crate::error::CliError;
use crate::output::Table;

const EP_REFERENCE: f64 = 1.42207;

pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    /// `value <= limit` unless the check is a lower bound.
    pub lower_bound: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64, detail: String) -> Self {
        Self { name, value, limit, lower_bound: false, detail }
    }

    fn at_least(name: &'static str, value: f64, limit: f64, detail: String) -> Self {
        Self { name, value, limit, lower_bound: true, detail }
    }

    pub fn passed(&self) -> bool {
        if self.lower_bound {
            self.value >= self.limit
        } else {
            self.value <= self.limit
        }
    }
}

/// Deterministic, well-spread points in `[-4, 4]²`.
pub fn probe_points(count: usize) -> Vec<(f64, f64)> {
    const A: f64 = 0.618_033_988_749_894_8;
    const B: f64 = 0.754_877_666_246_692_7;
    (0..count)
        .map(|k| {
            let k = k as f64;
            (-4.0 + 8.0 * (0.5 + k * A).fract(), -4.0 + 8.0 * (0.5 + k * B).fract())
        })
        .collect()
}

fn matrix_elements() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    let mut at = (0, 0, 0.0);
    for eps in [0.5, 1.0, 1.42207, 1.5, 2.0, 2.5, 3.0] {
        for n in 0..=20 {
            for m in n..=20 {
                let d = (potential_element_closed(n, m, eps)? - potential_element_quad(n, m, eps)?).norm();
                if d > worst {
                    worst = d;
                    at = (n, m, eps);
                }
            }
        }
    }
    Ok(Check::at_most("matrix_elements", worst, 1e-8, format!("worst at n={}, m={}, epsilon={}", at.0, at.1, at.2)))
}

fn oscillator_spectrum(s2: &Spectrum) -> Check {
    let worst = (0..=10).map(|n| (s2.pairs[n].value - (n as f64 + 0.5)).norm()).fold(0.0, f64::max);
    Check::at_most("spectrum_eps2", worst, 1e-8, "max |E_n - (n + 1/2)| for n <= 10".into())
}

fn field(s: &Spectrum, k: usize, grid: &PhaseGrid) -> Result<WignerField, CliError> {
    Ok(wigner_from_coeffs(&s.pairs[k].coeffs, s.pairs[k].value, grid)?)
}

pub fn run_checks(n_max: usize) -> Result<Vec<Check>, CliError> {
    let grid = PhaseGrid::default_grid();
    let s2 = spectrum::spectrum_at(2.0, n_max)?;
    let s15 = spectrum::spectrum_at(1.5, n_max)?;
    let s14 = spectrum::spectrum_at(1.4, n_max)?;
    let s3 = spectrum::spectrum_at(3.0, n_max)?;
    let mut checks = vec![matrix_elements()?, oscillator_spectrum(&s2)];

    let states: [(&Spectrum, usize); 5] = [(&s2, 1), (&s15, 0), (&s15, 1), (&s3, 0), (&s14, 1)];
    let points = probe_points(100);
    let mut oracle_worst: f64 = 0.0;
    for (s, k) in states {
        for &(x, p) in &points {
            let closed = wigner_at(&s.pairs[k].coeffs, x, p).re;
            oracle_worst = oracle_worst.max((closed - wigner_quad(&s.pairs[k].coeffs, x, p)?).abs());
        }
    }
    checks.push(Check::at_most("wigner_oracle", oracle_worst, 1e-8, "5 states x 100 points".into()));

    let contained: [(&Spectrum, usize); 5] = [(&s2, 0), (&s2, 1), (&s2, 2), (&s15, 0), (&s15, 1)];
    let fields: Vec<WignerField> = contained.iter().map(|&(s, k)| field(s, k, &grid)).collect::<Result<_, _>>()?;
    let norm_worst = fields.iter().map(|w| (w.integral() - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most(
        "normalization",
        norm_worst,
        1e-6,
        "max |integral W - 1| on the default grid, epsilon 2 states 0-2 and 1.5 states 0-1".into(),
    ));
    let wide = PhaseGrid::square(8.0, 321)?;
    let wide_fields = [field(&s3, 0, &wide)?, field(&s14, 1, &wide)?];
    let wide_worst = wide_fields.iter().map(|w| (w.integral() - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most(
        "normalization_wide",
        wide_worst,
        1e-6,
        "max |integral W - 1| on [-8, 8]^2, epsilon 3 state 0 and 1.4 state 1".into(),
    ));
    let residue_worst = fields.iter().chain(&wide_fields).map(|w| w.imag_residue).fold(0.0, f64::max);
    checks.push(Check::at_most("imag_residue", residue_worst, 1e-12, "max |Im W| before discard".into()));

    let potential2 = PotentialSpec::new(2.0)?;
    let w2 = &fields[1];
    let flow2 = flow_field(w2, &s2.pairs[1].coeffs, &potential2, JpConfig::default())?;
    let mut rotation: f64 = 0.0;
    let mut sign_mismatch = 0usize;
    let mut zero_flow: f64 = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.np {
            let k = grid.index(i, j);
            let (x, p, w) = (grid.x(i), grid.p(j), w2.values[k]);
            rotation = rotation.max((flow2.jp[k] + x * w).abs());
            let pw = p * w;
            if pw.abs() > 1e-12 && flow2.jx[k].signum() != pw.signum() {
                sign_mismatch += 1;
            }
            if w.abs() <= 1e-13 {
                zero_flow = zero_flow.max(flow2.norm[k]);
            }
        }
    }
    checks.push(Check::at_most("flow_rotation_eps2", rotation, 1e-9, "max |J_p + x W|, state 1".into()));
    checks.push(Check::at_most("flow_sign_eps2", sign_mismatch as f64, 0.0, "nodes with sgn J_x != sgn(p W)".into()));
    checks.push(Check::at_most("flow_zeros_eps2", zero_flow, 1e-12, "max |J| where |W| <= 1e-13".into()));

    let sym = symmetry_diagnostics(&fields[3], None)?;
    let sym1 = symmetry_diagnostics(&fields[4], None)?;
    checks.push(Check::at_most(
        "symmetry_unbroken",
        sym.x_defect.max(sym1.x_defect),
        1e-8,
        "x-reflection defect, epsilon 1.5 states 0 and 1".into(),
    ));
    let (w14a, w14b) = (field(&s14, 1, &grid)?, field(&s14, 2, &grid)?);
    let mirror = symmetry_diagnostics(&w14a, Some(&w14b))?.mirror_defect.unwrap_or(f64::NAN);
    checks.push(Check::at_most(
        "symmetry_broken_pair",
        mirror,
        1e-7,
        "mirror defect, epsilon 1.4 states 1 and 2".into(),
    ));
    let cyl = fields[..3]
        .iter()
        .map(|w| {
            let r = symmetry_diagnostics(w, None)?;
            Ok(r.x_defect.max(r.p_defect).max(r.transpose_defect.unwrap_or(0.0)))
        })
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("symmetry_cylindrical", cyl, 1e-10, "epsilon 2 states 0-2".into()));

    let ep = spectrum::find_ep((1, 2), (1.40, 1.45), n_max, 1e-7)?;
    checks.push(Check::at_most(
        "ep_location",
        (ep.eps_ep - EP_REFERENCE).abs(),
        1e-3,
        format!("eps_ep = {}", ep.eps_ep),
    ));

    let cfg = CirculationConfig::default();
    let mut plateau: f64 = 0.0;
    for (s, eps) in [(&s2, 2.0), (&s15, 1.5)] {
        let potential = PotentialSpec::new(eps)?;
        plateau = plateau.max(circulation(&s.pairs[1].coeffs, s.pairs[1].value, &potential, 1, cfg)?.value.abs());
    }
    checks.push(Check::at_most("circulation_plateau", plateau, 1e-6, "max |C| at epsilon 2.0 and 1.5".into()));
    let potential14 = PotentialSpec::new(1.4)?;
    let c14 = circulation(&s14.pairs[1].coeffs, s14.pairs[1].value, &potential14, 1, cfg)?.value;
    let oracle14 = circulation_oracle(&s14.pairs[1].coeffs, s14.pairs[1].value, &potential14, cfg.include_dwdt)?;
    checks.push(Check::at_least("circulation_broken", c14.abs(), 1e-3, format!("C(1.40) = {c14}")));
    checks.push(Check::at_most("circulation_oracle", (c14 - oracle14).abs(), 1e-6, format!("1D oracle {oracle14}")));
    Ok(checks)
}

pub fn validate(n_max: usize) -> Result<(Table, usize), CliError> {
    let checks = run_checks(n_max)?;
    let mut table = Table::new(vec!["check", "value", "limit", "bound", "pass", "detail"]);
    let mut failed = 0;
    for c in &checks {
        failed += usize::from(!c.passed());
        table.push(vec![
            c.name.into(),
            c.value.into(),
            c.limit.into(),
            if c.lower_bound { "min" } else { "max" }.into(),
            c.passed().into(),
            c.detail.clone().into(),
        ]);
    }
    table.set_meta("summary", json!({ "checks": checks.len(), "failed": failed }));
    Ok((table, failed))
}
