use num_complex::Complex64;
use ptwigner_core::hamiltonian::PotentialSpec;
use ptwigner_core::spectrum::{self, Classification, EigenPair, Spectrum};
use ptwigner_core::wigner::{
    circulation, continuity_residual, flow_field, wigner_from_coeffs, CirculationConfig, CirculationResult, JpConfig,
    PhaseGrid,
};
use ptwigner_core::Error as CoreError;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::EpsRange;
use crate::error::CliError;
use crate::output::{Cell, Table};

/// A finished table, plus the failures that make it partial.
pub struct Produced {
    pub table: Table,
    pub failures: Vec<String>,
}

impl Produced {
    fn complete(table: Table) -> Self {
        Self { table, failures: Vec::new() }
    }
}

fn is_numerical(e: &CoreError) -> bool {
    matches!(e, CoreError::NoConvergence { .. } | CoreError::Overflow { .. })
}

fn partner(c: Classification) -> i64 {
    match c {
        Classification::PairMember(k) => k as i64,
        _ => -1,
    }
}

fn state_of(spectrum: &Spectrum, state_index: usize) -> Result<&EigenPair, CliError> {
    spectrum.pairs.get(state_index).ok_or_else(|| {
        CliError::Config(format!("state {state_index} outside spectrum of size {}", spectrum.pairs.len()))
    })
}

fn state_meta(pair: &EigenPair, state_index: usize) -> Value {
    json!({
        "index": state_index,
        "energy_re": pair.value.re,
        "energy_im": pair.value.im,
        "class": pair.classification.label(),
    })
}

pub fn spectrum_sweep(eps: &EpsRange, n_max: usize) -> Result<Produced, CliError> {
    let values = eps.values();
    let results: Vec<(f64, Result<Spectrum, CoreError>)> =
        values.par_iter().map(|&e| (e, spectrum::spectrum_at(e, n_max))).collect();
    let mut spectra = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (e, r) in results {
        match r {
            Ok(s) => spectra.push(s),
            Err(err) if is_numerical(&err) => failures.push(format!("epsilon {e}: {err}")),
            Err(err) => return Err(err.into()),
        }
    }
    let records = spectrum::link_branches(spectra)?;
    let mut table = Table::new(vec!["epsilon", "level", "re_e", "im_e", "class", "partner", "branch", "branch_break"]);
    for rec in &records {
        for (level, pair) in rec.spectrum.pairs.iter().enumerate() {
            table.push(vec![
                rec.epsilon.into(),
                level.into(),
                pair.value.re.into(),
                pair.value.im.into(),
                pair.classification.label().into(),
                Cell::Int(partner(pair.classification)),
                rec.branch_ids[level].into(),
                rec.breaks.contains(&level).into(),
            ]);
        }
    }
    table.set_meta("epsilon_values", json!(values));
    Ok(Produced { table, failures })
}

pub fn ep_find(branches: (usize, usize), bracket: (f64, f64), tol: f64, n_max: usize) -> Result<Produced, CliError> {
    let ep = spectrum::find_ep(branches, bracket, n_max, tol)?;
    let mut table =
        Table::new(vec!["eps_ep", "bracket_lo", "bracket_hi", "branch_a", "branch_b", "n_max", "bisection_steps"]);
    table.push(vec![
        ep.eps_ep.into(),
        ep.bracket.0.into(),
        ep.bracket.1.into(),
        ep.branch_pair.0.into(),
        ep.branch_pair.1.into(),
        ep.n_max.into(),
        ep.bisection_steps.into(),
    ]);
    Ok(Produced::complete(table))
}

fn grid_meta(grid: &PhaseGrid) -> Value {
    json!({ "hx": grid.hx(), "hp": grid.hp() })
}

pub fn wigner_grid(eps: f64, state_index: usize, grid: &PhaseGrid, n_max: usize) -> Result<Produced, CliError> {
    let spec = spectrum::spectrum_at(eps, n_max)?;
    let pair = state_of(&spec, state_index)?;
    let w = wigner_from_coeffs(&pair.coeffs, pair.value, grid)?;
    let mut table = Table::new(vec!["x", "p", "w"]);
    for i in 0..grid.nx {
        for j in 0..grid.np {
            table.push(vec![grid.x(i).into(), grid.p(j).into(), w.at(i, j).into()]);
        }
    }
    table.set_meta("state", state_meta(pair, state_index));
    table.set_meta("spacing", grid_meta(grid));
    table.set_meta(
        "field",
        json!({ "integral": w.integral(), "imag_residue": w.imag_residue, "boundary_max": w.boundary_max() }),
    );
    Ok(Produced::complete(table))
}

pub fn flow(eps: f64, state_index: usize, grid: &PhaseGrid, n_max: usize) -> Result<Produced, CliError> {
    let spec = spectrum::spectrum_at(eps, n_max)?;
    let pair = state_of(&spec, state_index)?;
    let potential = PotentialSpec::new(eps)?;
    let w = wigner_from_coeffs(&pair.coeffs, pair.value, grid)?;
    let f = flow_field(&w, &pair.coeffs, &potential, JpConfig::default())?;
    let res = continuity_residual(&w, &f, &potential)?;
    let mut table = Table::new(vec!["x", "p", "w", "jx", "jp", "norm", "residual"]);
    for i in 0..grid.nx {
        for j in 0..grid.np {
            let k = grid.index(i, j);
            table.push(vec![
                grid.x(i).into(),
                grid.p(j).into(),
                w.values[k].into(),
                f.jx[k].into(),
                f.jp[k].into(),
                f.norm[k].into(),
                res.values[k].into(),
            ]);
        }
    }
    table.set_meta("state", state_meta(pair, state_index));
    table.set_meta("spacing", grid_meta(grid));
    table.set_meta(
        "field",
        json!({
            "integral": w.integral(),
            "imag_residue": w.imag_residue,
            "jp_imag_residue": f.jp_imag_residue,
            "continuity_interior_max": res.interior_max,
        }),
    );
    Ok(Produced::complete(table))
}

struct CirculationRow {
    epsilon: f64,
    energy: Complex64,
    class: &'static str,
    outcome: Result<CirculationResult, String>,
}

pub fn circulation_sweep(
    eps: &EpsRange,
    state_index: usize,
    include_dwdt: bool,
    r_init: f64,
    n_max: usize,
) -> Result<Produced, CliError> {
    let cfg = CirculationConfig { r_init, include_dwdt, ..CirculationConfig::default() };
    let rows: Vec<Result<CirculationRow, CliError>> = eps
        .values()
        .par_iter()
        .map(|&e| {
            let nan = Complex64::new(f64::NAN, f64::NAN);
            let spec = match spectrum::spectrum_at(e, n_max) {
                Ok(s) => s,
                Err(err) if is_numerical(&err) => {
                    return Ok(CirculationRow { epsilon: e, energy: nan, class: "", outcome: Err(err.to_string()) })
                }
                Err(err) => return Err(err.into()),
            };
            let pair = state_of(&spec, state_index)?;
            let potential = PotentialSpec::new(e)?;
            let outcome = match circulation(&pair.coeffs, pair.value, &potential, state_index, cfg) {
                Ok(c) => Ok(c),
                Err(err) if is_numerical(&err) => Err(err.to_string()),
                Err(err) => return Err(err.into()),
            };
            Ok(CirculationRow { epsilon: e, energy: pair.value, class: pair.classification.label(), outcome })
        })
        .collect();
    let mut table =
        Table::new(vec!["epsilon", "state", "re_e", "im_e", "class", "c", "r_final", "passes", "status", "history"]);
    let mut failures = Vec::new();
    for row in rows {
        let row = row?;
        let (c, r_final, history, status) = match row.outcome {
            Ok(c) => (c.value, c.domain_half_width, c.growth_history, "ok"),
            Err(msg) => {
                failures.push(format!("epsilon {}: {msg}", row.epsilon));
                (f64::NAN, f64::NAN, Vec::new(), "no_convergence")
            }
        };
        table.push(vec![
            row.epsilon.into(),
            state_index.into(),
            row.energy.re.into(),
            row.energy.im.into(),
            row.class.into(),
            c.into(),
            r_final.into(),
            history.len().into(),
            status.into(),
            Cell::Nested(history.iter().map(|&(r, n, v)| vec![r, n as f64, v]).collect()),
        ]);
    }
    table.set_meta(
        "circulation",
        json!({ "r_init": cfg.r_init, "h_init": cfg.h_init, "tol": cfg.tol, "r_limit": cfg.r_limit }),
    );
    Ok(Produced { table, failures })
}
