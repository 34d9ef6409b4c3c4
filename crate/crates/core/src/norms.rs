//! Discrete Lebesgue norms and Sobolev seminorms on uniform grids.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_cube, signed_index, unflatten};
use crate::lattice::GridValues;

/// Relative size of edge values above which spectral derivatives are flagged.
pub const EDGE_TOL: f64 = 1e-8;

/// Lebesgue exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PNorm {
    Finite(f64),
    Inf,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(PNorm::Inf)
        } else if p >= 1.0 {
            Ok(PNorm::Finite(p))
        } else {
            Err(Error::Parameter(format!("p must lie in [1, ∞], got {p}")))
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn recip(self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Inf => 0.0,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, PNorm::Inf)
    }

    /// True for the exponents the experiment harness accepts.
    pub fn is_harness_value(self) -> bool {
        match self {
            PNorm::Inf => true,
            PNorm::Finite(p) => p == 1.0 || p == 2.0 || p == 4.0,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PNorm::Inf),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::Parameter(format!("cannot parse p from {s:?}")))?;
                PNorm::new(p)
            }
        }
    }
}

/// `(Σ |v|^p spacing^dim)^{1/p}`, or `max |v|` for `p = ∞`.
pub fn lp_norm(values: &[f64], p: PNorm, spacing: f64, dim: usize) -> f64 {
    match p {
        PNorm::Inf => values.iter().fold(0.0, |a, v| a.max(v.abs())),
        PNorm::Finite(p) => {
            let cell = spacing.powi(dim as i32);
            // Scale by the maximum so large p cannot overflow.
            let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = values.iter().map(|v| (v.abs() / scale).powf(p)).sum();
            scale * (sum * cell).powf(1.0 / p)
        }
    }
}

pub fn grid_lp_norm(grid: &GridValues, p: PNorm) -> f64 {
    lp_norm(&grid.data, p, grid.spacing, grid.dim)
}

/// All multi-indices of length `dim` and order `k`.
pub fn multi_indices(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == dim {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=k).rev() {
            prefix.push(a);
            rec(dim, k - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        rec(dim, k, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// A seminorm value with an optional accuracy warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seminorm {
    pub value: f64,
    pub warning: Option<String>,
}

/// Largest absolute value on the outer shell of the grid.
pub fn edge_max_abs(grid: &GridValues) -> f64 {
    let n = grid.points_per_axis;
    let mut idx = vec![0usize; grid.dim];
    let mut m = 0.0f64;
    for (flat, v) in grid.data.iter().enumerate() {
        unflatten(flat, n, &mut idx);
        if idx.iter().any(|&i| i == 0 || i + 1 == n) {
            m = m.max(v.abs());
        }
    }
    m
}

/// `D^α` of grid data by spectral differentiation, treating the grid as one
/// period of a periodic function.
pub fn spectral_derivative(grid: &GridValues, alpha: &[usize]) -> Result<GridValues> {
    if alpha.len() != grid.dim {
        return Err(Error::Domain(format!("multi-index has length {}, grid dimension is {}", alpha.len(), grid.dim)));
    }
    let n = grid.points_per_axis;
    let mut data: Vec<Complex64> = grid.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_cube(&mut data, n, grid.dim, false);
    let period = n as f64 * grid.spacing;
    let factors: Vec<Vec<Complex64>> = alpha
        .iter()
        .map(|&a| {
            (0..n)
                .map(|q| {
                    if a % 2 == 1 && n % 2 == 0 && q == n / 2 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let xi = 2.0 * std::f64::consts::PI * signed_index(q, n) as f64 / period;
                        Complex64::new(0.0, xi).powu(a as u32)
                    }
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; grid.dim];
    for (flat, v) in data.iter_mut().enumerate() {
        unflatten(flat, n, &mut idx);
        for (axis, &q) in idx.iter().enumerate() {
            *v *= factors[axis][q];
        }
    }
    fft_cube(&mut data, n, grid.dim, true);
    let scale = 1.0 / data.len() as f64;
    Ok(GridValues { data: data.iter().map(|v| v.re * scale).collect(), ..grid.clone() })
}

/// `|f|_{W_p^k} = max_{|α| = k} ‖D^α f‖_p` with spectral derivatives.
pub fn sobolev_seminorm(grid: &GridValues, k: usize, p: PNorm) -> Result<Seminorm> {
    let scale = grid.max_abs();
    let edge = edge_max_abs(grid);
    let warning = (k > 0 && scale > 0.0 && edge > EDGE_TOL * scale).then(|| {
        format!("edge values reach {edge:.3e} (relative {:.3e}); spectral derivatives assume periodic data", edge / scale)
    });
    if k == 0 {
        return Ok(Seminorm { value: grid_lp_norm(grid, p), warning });
    }
    let mut value = 0.0f64;
    for alpha in multi_indices(grid.dim, k) {
        value = value.max(grid_lp_norm(&spectral_derivative(grid, &alpha)?, p));
    }
    Ok(Seminorm { value, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_and_display() {
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Inf);
        assert_eq!("2".parse::<PNorm>().unwrap(), PNorm::Finite(2.0));
        assert!("0.5".parse::<PNorm>().is_err());
        assert_eq!(PNorm::Finite(4.0).to_string(), "4");
        assert!(PNorm::Finite(4.0).is_harness_value());
        assert!(!PNorm::Finite(3.0).is_harness_value());
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = GridValues::from_fn(1, 24 * 64 + 1, 1.0 / 64.0, -12.0, |x| (-x[0] * x[0]).exp());
        assert!((grid_lp_norm(&g, PNorm::Finite(2.0)) - (PI / 2.0).powf(0.25)).abs() < 1e-6);
        assert_eq!(grid_lp_norm(&g, PNorm::Inf), 1.0);
    }

    #[test]
    fn zero_field() {
        let g = GridValues::from_fn(2, 9, 0.5, -2.0, |_| 0.0);
        for p in [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf] {
            for k in 0..3 {
                let s = sobolev_seminorm(&g, k, p).unwrap();
                assert_eq!(s.value, 0.0);
                assert!(s.warning.is_none());
            }
        }
    }

    #[test]
    fn band_limited_first_derivative() {
        let l = 8.0;
        let n = 256;
        let w = 2.0 * PI * 3.0 / l;
        let g = GridValues::from_fn(1, n, l / n as f64, -l / 2.0, |x| (w * x[0]).sin());
        let s = sobolev_seminorm(&g, 1, PNorm::Finite(2.0)).unwrap();
        assert!((s.value - w * (l / 2.0).sqrt()).abs() < 1e-4);
        let s = sobolev_seminorm(&g, 1, PNorm::Inf).unwrap();
        assert!((s.value - w).abs() < 1e-4);
        assert!(s.warning.is_some());
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(multi_indices(3, 1).len(), 3);
    }
}
