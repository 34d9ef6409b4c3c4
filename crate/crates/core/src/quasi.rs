//! The band-limited quasi-interpolant `g(x) = Σ_j f(hj) φ(x/h − j)`.
//!
//! In dimension `n ≥ 2` the kernel is the tensor product `Π_i φ(t_i)`.
//! Since `φ(j) = δ_{j0}`, `g` interpolates on `hℤⁿ`; since `supp ρ̂ ⊂ [−π−ε, π+ε]`,
//! `ĝ` vanishes outside `[−(π+ε)/h, (π+ε)/h]ⁿ`.

use rayon::prelude::*;

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::experiments::config::SweepConfig;
use crate::experiments::convergence::{run_sweep, Operator};
use crate::experiments::report::ErrorReport;
use crate::experiments::targets::TargetFunction;
use crate::interpolator::{torus_length, SampledField};
use crate::lattice::LatticeArray;
use crate::norms::PNorm;
use crate::spectral::{symbol_samples, Synthesis};

/// `g` for one data set and one cutoff.
#[derive(Debug, Clone, Copy)]
pub struct QuasiInterpolant<'a> {
    field: &'a SampledField,
    spec: &'a CutoffSpec,
}

/// Builds `g`; the data must be compactly supported.
pub fn quasi_interpolant<'a>(field: &'a SampledField, spec: &'a CutoffSpec) -> Result<QuasiInterpolant<'a>> {
    if !field.decay_flag {
        return Err(Error::Parameter("the quasi-interpolant needs compactly supported data (decay_flag)".into()));
    }
    Ok(QuasiInterpolant { field, spec })
}

/// Zero padding (lattice points) that keeps wrapped `φ` tails below the decay cap.
pub fn quasi_padding(spec: &CutoffSpec) -> usize {
    spec.phi_radius.ceil() as usize
}

impl<'a> QuasiInterpolant<'a> {
    pub fn field(&self) -> &'a SampledField {
        self.field
    }

    pub fn spec(&self) -> &'a CutoffSpec {
        self.spec
    }

    /// Declared band `(π + 2ε)/h` per axis.
    pub fn band(&self) -> f64 {
        self.spec.declared_band / self.field.grid.h
    }

    /// `g(x)` by direct summation; translates with `|x_i/h − j_i| > R_φ` are dropped.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let dim = self.field.grid.dim;
        if x.len() != dim {
            return Err(Error::Domain(format!("point has {} coordinates, expected {dim}", x.len())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("point {x:?} is not finite")));
        }
        let h = self.field.grid.h;
        let n = self.field.data_radius() as i64;
        let factors: Vec<Vec<f64>> =
            x.iter().map(|&c| (-n..=n).map(|j| self.spec.phi_eval(c / h - j as f64)).collect()).collect();
        let side = (2 * n + 1) as usize;
        let mut sum = 0.0;
        for (flat, &v) in self.field.values.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut rest = flat;
            let mut w = v;
            for axis in (0..dim).rev() {
                w *= factors[axis][rest % side];
                rest /= side;
            }
            sum += w;
        }
        Ok(sum)
    }

    /// [`Self::eval`] at many points in parallel, in input order.
    pub fn eval_points(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }

    /// `g` on the fine torus grid of spacing `h/M`. `padding` defaults to
    /// [`quasi_padding`] lattice points on each side of the data box.
    pub fn synthesize(&self, fine_factor: usize, padding: Option<usize>) -> Result<Synthesis> {
        let n = self.field.data_radius();
        let p = torus_length(n, padding.unwrap_or_else(|| quasi_padding(self.spec)));
        quasi_synthesis(&self.field.values, self.field.grid.h, p, fine_factor, self.spec)
    }
}

/// `Σ_m a_m φ(x/h − m)` with the coefficients wrapped onto a torus of
/// `coarse_len` lattice points.
pub fn quasi_synthesis(
    coeffs: &LatticeArray,
    h: f64,
    coarse_len: usize,
    fine_factor: usize,
    spec: &CutoffSpec,
) -> Result<Synthesis> {
    if fine_factor < 2 {
        return Err(Error::Parameter(format!("fine factor must be at least 2, got {fine_factor}")));
    }
    let symbol = symbol_samples(h, coarse_len, fine_factor, |xi| Ok(spec.rho_hat(h * xi)))?;
    Synthesis::new(coeffs, h, coarse_len, fine_factor, &symbol)
}

/// Empirical order of `‖f − g‖_p` over a dyadic sweep.
pub fn quasi_error_rate(
    target: &TargetFunction,
    spec: &CutoffSpec,
    h_list: &[f64],
    p: PNorm,
    k: usize,
    config: &SweepConfig,
) -> Result<ErrorReport> {
    if h_list.len() < 3 {
        return Err(Error::Parameter(format!("an order fit needs at least 3 values of h, got {}", h_list.len())));
    }
    run_sweep(target, Operator::Quasi(spec), h_list, p, k, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::build_cutoff;
    use crate::lagrange::GridSpec;
    use std::f64::consts::PI;

    fn bspline_field(h: f64, n: usize) -> SampledField {
        let grid = GridSpec::new(h, 1, 8, 4.0 * h).unwrap();
        SampledField::from_fn(grid, n, true, |x| crate::experiments::targets::bspline_derivative(3, 0, x[0])).unwrap()
    }

    #[test]
    fn interpolates_on_lattice() {
        let spec = build_cutoff(1.0).unwrap();
        let field = bspline_field(0.25, 24);
        let g = quasi_interpolant(&field, &spec).unwrap();
        for j in -12..=12 {
            let x = 0.25 * j as f64;
            let f = crate::experiments::targets::bspline_derivative(3, 0, x);
            assert!((g.eval(&[x]).unwrap() - f).abs() < 1e-8, "j={j}");
        }
        let syn = g.synthesize(8, None).unwrap();
        let vals = syn.values();
        for j in -12..=12 {
            let x = 0.25 * j as f64;
            let f = crate::experiments::targets::bspline_derivative(3, 0, x);
            assert!((vals.value_near(&[x]).unwrap() - f).abs() < 1e-8);
        }
    }

    #[test]
    fn band_limited_spectrum() {
        let spec = build_cutoff(0.5).unwrap();
        let field = bspline_field(0.5, 12);
        let syn = quasi_interpolant(&field, &spec).unwrap().synthesize(8, None).unwrap();
        assert!(syn.out_of_band_fraction((PI + 0.5) / 0.5) < 1e-10);
        assert!(syn.out_of_band_fraction(2.0) > 1e-6);
    }

    #[test]
    fn delta_data_gives_phi() {
        let spec = build_cutoff(1.0).unwrap();
        let h = 0.5;
        let grid = GridSpec::new(h, 1, 8, 4.0 * h).unwrap();
        let field = SampledField::delta(grid, 6).unwrap();
        let g = quasi_interpolant(&field, &spec).unwrap();
        for x in [0.0, 0.13, 0.9, 3.3] {
            assert!((g.eval(&[x]).unwrap() - spec.phi_eval(x / h)).abs() < 1e-15);
        }
        let syn = g.synthesize(8, None).unwrap();
        let vals = syn.values();
        for x in [0.0, 0.0625 * 3.0, 1.5] {
            assert!((vals.value_near(&[x]).unwrap() - spec.phi_eval(x / h)).abs() < 1e-10);
        }
    }

    #[test]
    fn reproduces_its_own_band_on_a_torus() {
        // Trigonometric data with every frequency inside |ξ| ≤ (π − ε)/h.
        let eps = 0.5;
        let spec = build_cutoff(eps).unwrap();
        let h = 0.25;
        let radius = 20;
        let p = 2 * radius + 1;
        let w = 2.0 * PI * 7.0 / (p as f64 * h);
        assert!(w < (PI - eps) / h);
        let f = |x: f64| (w * x).cos() + 0.3 * (2.0 * w * x / 7.0).sin();
        let coeffs = LatticeArray::from_fn(1, radius, |j| f(h * j[0] as f64));
        let syn = quasi_synthesis(&coeffs, h, p, 8, &spec).unwrap();
        let vals = syn.values();
        let err = vals.data.iter().enumerate().map(|(i, v)| (v - f(vals.coordinate(i))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn zero_data_and_validation() {
        let spec = build_cutoff(1.0).unwrap();
        let grid = GridSpec::new(0.5, 2, 8, 2.0).unwrap();
        let field = SampledField::from_fn(grid, 4, true, |_| 0.0).unwrap();
        let g = quasi_interpolant(&field, &spec).unwrap();
        assert_eq!(g.eval(&[0.3, -0.1]).unwrap(), 0.0);
        assert!(g.eval(&[0.3]).is_err());
        let loose = SampledField::from_fn(grid, 4, false, |_| 1.0).unwrap();
        assert!(quasi_interpolant(&loose, &spec).is_err());
    }
}
