use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;
use crate::summation::NeumaierSum;

pub const MIN_NODES: usize = 33;

/// Rectangular phase-space grid with inclusive endpoints and odd node
/// counts, so the origin is a node of every symmetric grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        if ![x_min, x_max, p_min, p_max].iter().all(|v| v.is_finite()) || !(x_max > x_min) || !(p_max > p_min) {
            return Err(Error::InvalidInput(format!(
                "grid bounds [{x_min}, {x_max}] x [{p_min}, {p_max}] must be finite and increasing"
            )));
        }
        for (name, n) in [("nx", nx), ("np", np)] {
            if n < MIN_NODES || n % 2 == 0 {
                return Err(Error::InvalidInput(format!("{name} = {n} must be odd and at least {MIN_NODES}")));
            }
        }
        Ok(Self { x_min, x_max, p_min, p_max, nx, np })
    }

    /// `[-half, half]²` with `n` nodes per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    /// `[-5, 5]²`, 201 × 201.
    pub fn default_grid() -> Self {
        Self::square(5.0, 201).expect("valid constants")
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn hp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    /// Nodes are placed symmetrically about the centre, so mirrored nodes
    /// of a symmetric grid are exact negatives of each other.
    pub fn x(&self, i: usize) -> f64 {
        0.5 * (self.x_min + self.x_max) + (i as f64 - 0.5 * (self.nx - 1) as f64) * self.hx()
    }

    pub fn p(&self, j: usize) -> f64 {
        0.5 * (self.p_min + self.p_max) + (j as f64 - 0.5 * (self.np - 1) as f64) * self.hp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }

    /// Same bounds, spacing halved in both directions.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, np: 2 * self.np - 1, ..*self }
    }

    /// Composite Simpson integral of a node-valued field.
    pub fn simpson_integral(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "field does not match grid");
        let wx = simpson_weights(self.nx, self.hx()).expect("odd node count");
        let wp = simpson_weights(self.np, self.hp()).expect("odd node count");
        let mut acc = NeumaierSum::new();
        for (i, wxi) in wx.iter().enumerate() {
            let row = &values[i * self.np..(i + 1) * self.np];
            let mut inner = NeumaierSum::new();
            for (v, wpj) in row.iter().zip(&wp) {
                inner.add(v * wpj);
            }
            acc.add(wxi * inner.value());
        }
        acc.value()
    }

    /// Largest `|value|` on the outer ring of nodes.
    pub fn boundary_max(&self, values: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.nx {
            for j in 0..self.np {
                if i == 0 || j == 0 || i == self.nx - 1 || j == self.np - 1 {
                    m = m.max(values[self.index(i, j)].abs());
                }
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-12 * (self.x_max.abs() + self.p_max.abs()).max(1.0);
        (self.x_min + self.x_max).abs() <= tol && (self.p_min + self.p_max).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_nodes() {
        assert!(PhaseGrid::square(5.0, 32).is_err());
        assert!(PhaseGrid::square(5.0, 31).is_err());
        assert!(PhaseGrid::new(1.0, 1.0, -1.0, 1.0, 33, 33).is_err());
        let g = PhaseGrid::default_grid();
        assert_eq!(g.x(100), 0.0);
        assert!((g.p(200) - 5.0).abs() < 1e-14);
        assert_eq!(g.x(3), -g.x(197));
        assert!((g.hx() - 0.05).abs() < 1e-15);
        assert!(g.is_symmetric());
        assert_eq!(g.refined().nx, 401);
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let g = PhaseGrid::square(7.0, 141).unwrap();
        let v: Vec<f64> = (0..g.nx)
            .flat_map(|i| (0..g.np).map(move |j| (i, j)))
            .map(|(i, j)| (-(g.x(i).powi(2) + g.p(j).powi(2))).exp() / std::f64::consts::PI)
            .collect();
        assert!((g.simpson_integral(&v) - 1.0).abs() < 1e-12);
        assert!(g.boundary_max(&v) < 1e-21);
    }
}
