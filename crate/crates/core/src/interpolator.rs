//! The cardinal interpolation operator `I_h f(x) = Σ_j f(hj) χ_h(x - hj)`.
//!
//! Two evaluation routes are offered: a pointwise sum against the tabulated
//! Lagrange function, and a spectral route that multiplies the
//! periodised data spectrum by `m_h^{[n]}` on a fine frequency grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fast_len;
use crate::lagrange::{GridSpec, LagrangeTable};
use crate::lattice::{GridValues, LatticeArray};
use crate::multiplier::MultiplierContext;
use crate::spectral::{crop_centered, replica_index, symbol_samples, Synthesis};

/// Largest magnitude tolerated on the outer shell of compactly supported data.
pub const DECAY_SHELL_TOL: f64 = 1e-12;

/// Samples `f(hj)` for `‖j‖_∞ ≤ N_data`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: LatticeArray,
    /// Set when the data vanish (to `DECAY_SHELL_TOL`) on the boundary shell.
    pub decay_flag: bool,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: LatticeArray, decay_flag: bool) -> Result<Self> {
        if values.dim() != grid.dim {
            return Err(Error::Domain(format!("data dimension {} does not match grid dimension {}", values.dim(), grid.dim)));
        }
        if let Some((j, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("sample at {j:?} is not finite ({v})")));
        }
        if decay_flag {
            let edge = values.boundary_max_abs();
            if edge >= DECAY_SHELL_TOL {
                return Err(Error::Domain(format!(
                    "data flagged as compactly supported reach {edge:.3e} on the boundary shell"
                )));
            }
        }
        Ok(Self { grid, values, decay_flag })
    }

    /// Samples `f` on `hℤⁿ ∩ [-hN, hN]ⁿ`.
    pub fn from_fn(grid: GridSpec, data_radius: usize, decay_flag: bool, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let h = grid.h;
        let mut x = vec![0.0; grid.dim];
        let values = LatticeArray::from_fn(grid.dim, data_radius, |j| {
            for (xi, &ji) in x.iter_mut().zip(j) {
                *xi = h * ji as f64;
            }
            f(&x)
        });
        Self::new(grid, values, decay_flag)
    }

    /// Unit data at the origin.
    pub fn delta(grid: GridSpec, data_radius: usize) -> Result<Self> {
        Self::from_fn(grid, data_radius, true, |x| if x.iter().all(|&c| c == 0.0) { 1.0 } else { 0.0 })
    }

    pub fn data_radius(&self) -> usize {
        self.values.radius()
    }

    /// Points with `‖x‖_∞` up to this value are evaluated pointwise.
    pub fn trusted_radius(&self) -> f64 {
        0.5 * self.grid.h * self.data_radius() as f64
    }
}

/// `Σ_j f(hj) χ_h(x - hj)` over the stored samples. Translates farther than the
/// table radius `R` are dropped; their total weight is below `e^{-h(R-h)}`.
pub fn interpolate_point(field: &SampledField, table: &LagrangeTable, x: &[f64]) -> Result<f64> {
    check_table(field, table)?;
    if x.len() != field.grid.dim {
        return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), field.grid.dim)));
    }
    let limit = field.trusted_radius();
    if x.iter().any(|c| !c.is_finite() || c.abs() > limit + 1e-12) {
        return Err(Error::Extrapolation(format!("point {x:?} lies outside the trusted box ‖x‖_∞ ≤ {limit}")));
    }
    let h = field.grid.h;
    let n = field.data_radius() as i64;
    let factors: Vec<Vec<f64>> = x.iter().map(|&c| (-n..=n).map(|j| table.chi_1d(c - h * j as f64)).collect()).collect();
    let side = (2 * n + 1) as usize;
    let mut sum = 0.0;
    for (flat, &v) in field.values.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut rest = flat;
        let mut w = v;
        for axis in (0..x.len()).rev() {
            w *= factors[axis][rest % side];
            rest /= side;
        }
        sum += w;
    }
    Ok(sum)
}

/// [`interpolate_point`] at many points in parallel, results in input order.
pub fn interpolate_points(field: &SampledField, table: &LagrangeTable, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| interpolate_point(field, table, x)).collect()
}

fn check_table(field: &SampledField, table: &LagrangeTable) -> Result<()> {
    if (table.grid.h - field.grid.h).abs() > 1e-15 * field.grid.h || table.grid.dim != field.grid.dim {
        return Err(Error::Parameter(format!(
            "table (h = {}, dim {}) does not match the data (h = {}, dim {})",
            table.grid.h, table.grid.dim, field.grid.h, field.grid.dim
        )));
    }
    Ok(())
}

/// Zero padding added around the data box before the periodic transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Padding {
    /// `⌈28/h²⌉` lattice points in one dimension (wrap-around below `e^{-28}`),
    /// the data radius per axis otherwise.
    Auto,
    Points(usize),
}

impl Padding {
    pub fn points(self, h: f64, dim: usize, data_radius: usize) -> usize {
        match self {
            Padding::Points(p) => p,
            Padding::Auto if dim == 1 => (28.0 / (h * h)).ceil() as usize,
            Padding::Auto => data_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub fine_factor: usize,
    /// Spectral replicas `|β| ≤ 2πB` are kept on each axis.
    pub beta_radius: usize,
    pub padding: Padding,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { fine_factor: 8, beta_radius: 3, padding: Padding::Auto }
    }
}

/// Output of the spectral route.
#[derive(Debug, Clone)]
pub struct SpectralInterpolant {
    pub synthesis: Synthesis,
    /// Half-width of the data box, `hN_data`.
    pub data_extent: f64,
    /// Upper bound on the pointwise contribution of the discarded replicas.
    pub aliasing_bound: f64,
    pub warnings: Vec<String>,
}

impl SpectralInterpolant {
    /// Values on the whole fine torus.
    pub fn torus_values(&self) -> GridValues {
        self.synthesis.values()
    }

    /// Values on the `(h/M)` grid restricted to the data box.
    pub fn grid_values(&self) -> GridValues {
        crop_centered(&self.synthesis.values(), self.data_extent)
    }
}

/// Coarse torus length used for a data radius and padding.
pub fn torus_length(data_radius: usize, padding: usize) -> usize {
    fast_len(2 * data_radius + 1 + 2 * padding)
}

/// `I_h f` on `(h/M)ℤⁿ` by multiplying the periodised data spectrum with
/// `m_h^{[n]}` and inverting on the fine grid.
pub fn interpolate_grid_spectral(
    field: &SampledField,
    ctx: &MultiplierContext,
    opts: &SpectralOptions,
) -> Result<SpectralInterpolant> {
    if !field.decay_flag {
        return Err(Error::Parameter("the spectral route needs compactly supported data (decay_flag)".into()));
    }
    if opts.fine_factor < 2 || opts.beta_radius < 1 {
        return Err(Error::Parameter(format!(
            "need fine factor ≥ 2 and beta radius ≥ 1, got {} and {}",
            opts.fine_factor, opts.beta_radius
        )));
    }
    let h = field.grid.h;
    if (ctx.h() - h).abs() > 1e-15 * h || ctx.dim() != field.grid.dim {
        return Err(Error::Parameter("multiplier context does not match the data grid".into()));
    }
    let n = field.data_radius();
    let dim = field.grid.dim;
    let p = torus_length(n, opts.padding.points(h, dim, n));
    let b = opts.beta_radius as i64;
    let symbol = symbol_samples(h, p, opts.fine_factor, |xi| {
        if replica_index(xi, h).abs() > b {
            Ok(0.0)
        } else {
            ctx.m(xi)
        }
    })?;
    let synthesis = Synthesis::new(&field.values, h, p, opts.fine_factor, &symbol)?;
    // Everything beyond the kept replicas, or beyond the fine band, is dropped.
    let first_dropped = if 2 * opts.beta_radius + 1 < opts.fine_factor {
        (2 * opts.beta_radius + 1) as f64 * std::f64::consts::PI / h
    } else {
        opts.fine_factor as f64 * std::f64::consts::PI / h
    };
    let mass: f64 = field.values.values().iter().map(|v| v.abs()).sum();
    let aliasing_bound = mass * (opts.fine_factor as f64).powi(dim as i32) * ctx.m(first_dropped)?;
    let mut warnings = Vec::new();
    if aliasing_bound > 1e-12 {
        warnings.push(format!(
            "beta radius {} leaves an aliasing contribution up to {aliasing_bound:.3e}; increase it",
            opts.beta_radius
        ));
    }
    Ok(SpectralInterpolant { synthesis, data_extent: h * n as f64, aliasing_bound, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrange::chi_table;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(h: f64, n: usize) -> (GridSpec, LagrangeTable) {
        let radius = h * n as f64 + 30.0 / h;
        let grid = GridSpec::new(h, 1, 32, radius).unwrap();
        (grid, chi_table(&grid, 8).unwrap())
    }

    fn bump(x: f64) -> f64 {
        if x.abs() >= 3.0 {
            0.0
        } else {
            (-1.0 / (1.0 - (x / 3.0).powi(2))).exp()
        }
    }

    #[test]
    fn field_validation() {
        let grid = GridSpec::new(1.0, 1, 8, 4.0).unwrap();
        assert!(SampledField::from_fn(grid, 5, true, |_| 1.0).is_err());
        assert!(SampledField::from_fn(grid, 5, false, |_| 1.0).is_ok());
        assert!(SampledField::from_fn(grid, 5, false, |_| f64::NAN).is_err());
    }

    #[test]
    fn delta_data_gives_the_lagrange_function() {
        let (grid, table) = setup(0.5, 40);
        let field = SampledField::delta(grid, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = rng.random_range(-9.5..9.5);
            let a = interpolate_point(&field, &table, &[x]).unwrap();
            assert!((a - table.chi_eval(&[x]).unwrap()).abs() < 1e-10);
        }
        assert!(matches!(interpolate_point(&field, &table, &[10.5]), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn interpolation_property_and_constants() {
        let (grid, table) = setup(0.5, 40);
        let field = SampledField::from_fn(grid, 40, true, |x| bump(x[0])).unwrap();
        for j in -20i64..=20 {
            let v = interpolate_point(&field, &table, &[0.5 * j as f64]).unwrap();
            assert!((v - bump(0.5 * j as f64)).abs() < 1e-8);
        }
        // Constants: Σ_j χ_h(x - hj) = Σ_k m_h(2πk/h) e^{2πikx/h}, which is 1 only
        // up to 2m_h(2π/h); that is ~1e-4 at h = 1 and below 1e-16 at h = 1/2.
        let (grid, table) = setup(1.0, 120);
        let ones = SampledField::from_fn(grid, 120, false, |_| 1.0).unwrap();
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        for x in [0.0, 0.3, 1.7, -2.2] {
            let v = interpolate_point(&ones, &table, &[x]).unwrap();
            let expected: f64 = (-3i64..=3)
                .map(|k| ctx.m(2.0 * std::f64::consts::PI * k as f64).unwrap() * (2.0 * std::f64::consts::PI * k as f64 * x).cos())
                .sum();
            assert!((v - expected).abs() < 1e-9, "x={x} v={v} expected={expected}");
        }
        let (grid, table) = setup(0.5, 240);
        let ones = SampledField::from_fn(grid, 240, false, |_| 1.0).unwrap();
        for x in [0.0, 0.3, 1.7, -2.2] {
            assert!((interpolate_point(&ones, &table, &[x]).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn spectral_route_matches_pointwise() {
        let h = 0.5;
        let (grid, table) = setup(h, 40);
        let field = SampledField::from_fn(grid, 40, true, |x| bump(x[0]) * (1.0 + x[0])).unwrap();
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let opts = SpectralOptions { fine_factor: 8, beta_radius: 3, padding: Padding::Auto };
        let out = interpolate_grid_spectral(&field, &ctx, &opts).unwrap();
        assert!(out.warnings.is_empty());
        let fine = out.grid_values();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let i = rng.random_range(0..fine.points_per_axis);
            let x = fine.coordinate(i);
            if x.abs() > field.trusted_radius() {
                continue;
            }
            let p = interpolate_point(&field, &table, &[x]).unwrap();
            assert!((fine.data[i] - p).abs() < 1e-6, "x={x}");
        }
        let wider = interpolate_grid_spectral(&field, &ctx, &SpectralOptions { beta_radius: 4, ..opts }).unwrap();
        let diff = fine.data.iter().zip(&wider.grid_values().data).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        assert!(diff < 1e-10);
    }

    #[test]
    fn spectral_delta_reproduces_the_table() {
        let h = 0.5;
        let (grid, table) = setup(h, 24);
        let field = SampledField::delta(grid, 24).unwrap();
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let out = interpolate_grid_spectral(&field, &ctx, &SpectralOptions::default()).unwrap().grid_values();
        for i in 0..out.points_per_axis {
            let x = out.coordinate(i);
            assert!((out.data[i] - table.sample(&[x]).unwrap()).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn tiny_beta_radius_warns() {
        let grid = GridSpec::new(1.0, 1, 8, 4.0).unwrap();
        let field = SampledField::delta(grid, 8).unwrap();
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        let opts = SpectralOptions { fine_factor: 8, beta_radius: 1, padding: Padding::Points(8) };
        let out = interpolate_grid_spectral(&field, &ctx, &opts).unwrap();
        assert!(out.aliasing_bound > 0.0);
    }
}
