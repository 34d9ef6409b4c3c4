//! Uniformly sampled one-dimensional tables with local polynomial interpolation.

use serde::{Deserialize, Serialize};

/// Stencil width used by [`UniformTable::eval`].
pub const STENCIL: usize = 12;

/// Samples `values[i] = f(origin + i·spacing)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformTable {
    pub origin: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl UniformTable {
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Self {
        Self { origin, spacing, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last abscissa covered by the table.
    pub fn end(&self) -> f64 {
        self.origin + self.spacing * (self.values.len().saturating_sub(1)) as f64
    }

    /// True when a full stencil around `t` fits inside the table.
    pub fn covers(&self, t: f64) -> bool {
        let half = (STENCIL / 2) as f64 * self.spacing;
        t >= self.origin + half && t <= self.end() - half
    }

    /// Local Lagrange interpolation on the `STENCIL` nodes nearest to `t`.
    /// Nodes are reproduced exactly. Outside the table the nearest stencil is
    /// extrapolated, so callers should check [`Self::covers`] first.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let u = (t - self.origin) / self.spacing;
        let nearest = u.round();
        if (u - nearest).abs() < 1e-9 && nearest >= 0.0 && (nearest as usize) < n {
            return self.values[nearest as usize];
        }
        let width = STENCIL.min(n);
        let start = ((u.floor() as i64) - (width as i64 / 2 - 1)).clamp(0, (n - width) as i64) as usize;
        let mut sum = 0.0;
        for i in 0..width {
            let xi = (start + i) as f64;
            let mut w = 1.0;
            for k in 0..width {
                if k != i {
                    let xk = (start + k) as f64;
                    w *= (u - xk) / (xi - xk);
                }
            }
            sum += w * self.values[start + i];
        }
        sum
    }
}
