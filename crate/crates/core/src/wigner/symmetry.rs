use serde::{Deserialize, Serialize};

use super::cross::WignerField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |W_a(x,p) - W_a(-x,p)|`
    pub x_defect: f64,
    /// `max |W_a(x,p) - W_a(x,-p)|`
    pub p_defect: f64,
    /// `max |W_a(x,p) - W_a(p,x)|` on square grids.
    pub transpose_defect: Option<f64>,
    /// `max |W_b(x,p) - W_a(-x,p)|` when a partner field is given.
    pub mirror_defect: Option<f64>,
}

/// Reflection defects of a field, and of a partner field against its
/// mirror image when given.
pub fn symmetry_diagnostics(w_a: &WignerField, w_b: Option<&WignerField>) -> Result<SymmetryReport> {
    let g = w_a.grid;
    if !g.is_symmetric() {
        return Err(Error::InvalidInput("symmetry diagnostics need a grid symmetric about the origin".into()));
    }
    if let Some(b) = w_b {
        if b.grid != g {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
    }
    let (nx, np) = (g.nx, g.np);
    let (mut x_defect, mut p_defect, mut mirror): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let square = nx == np && (g.x_max - g.p_max).abs() <= 1e-12 * g.x_max.abs().max(1.0);
    let mut transpose: f64 = 0.0;
    for i in 0..nx {
        for j in 0..np {
            let v = w_a.at(i, j);
            x_defect = x_defect.max((v - w_a.at(nx - 1 - i, j)).abs());
            p_defect = p_defect.max((v - w_a.at(i, np - 1 - j)).abs());
            if square {
                transpose = transpose.max((v - w_a.at(j, i)).abs());
            }
            if let Some(b) = w_b {
                mirror = mirror.max((b.at(i, j) - w_a.at(nx - 1 - i, j)).abs());
            }
        }
    }
    Ok(SymmetryReport {
        x_defect,
        p_defect,
        transpose_defect: square.then_some(transpose),
        mirror_defect: w_b.map(|_| mirror),
    })
}
