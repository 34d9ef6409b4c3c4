//! Slow reference implementations used by tests and `verify`.
//!
//! Nothing here calls the production multiplier, solver or FFT paths.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrange::GridSpec;
use crate::lattice::LatticeArray;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(q1) * Dd::from_f64(b);
        let q2 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `2π` to double-double precision.
pub const TWO_PI_DD: Dd = Dd::new(6.283_185_307_179_586, 2.449_293_598_294_706_4e-16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    Double,
    DoubleDouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub precision: Precision,
    /// `K_oracle / K` for the shift series.
    pub k_factor: usize,
    /// Quadrature density relative to the production transform.
    pub density_factor: usize,
    /// Refinement steps after the first solve.
    pub max_refinements: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { precision: Precision::DoubleDouble, k_factor: 2, density_factor: 4, max_refinements: 6 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_factor < 2 || self.density_factor < 4 {
            return Err(Error::Parameter(format!(
                "oracle needs k_factor ≥ 2 and density_factor ≥ 4, got {} and {}",
                self.k_factor, self.density_factor
            )));
        }
        Ok(())
    }
}

/// Shift radius the production series would use at tolerance `1e-16`.
fn production_radius(h: f64) -> usize {
    ((h / PI) * (1e16f64).ln().sqrt()).ceil() as usize + 1
}

/// Compensated accumulator in either precision.
struct Acc {
    precision: Precision,
    sum: Dd,
}

impl Acc {
    fn new(precision: Precision) -> Self {
        Self { precision, sum: Dd::default() }
    }

    fn add(&mut self, v: Dd) {
        self.sum = match self.precision {
            Precision::DoubleDouble => self.sum + v,
            Precision::Double => Dd::from_f64(self.sum.hi + v.to_f64()),
        };
    }
}

/// `(ln m_h(ξ), m_h(ξ))` from `m_h(ξ) = e^{−ξ²/4} / Σ_k e^{−(ξ − 2πk/h)²/4}`,
/// summed directly over `|k| ≤ K_oracle` with every exponent shifted by the
/// smallest one.
pub fn oracle_log_m(h: f64, xi: f64, cfg: &OracleConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(h > 0.0 && h.is_finite()) || !xi.is_finite() {
        return Err(Error::Domain(format!("need h > 0 and finite ξ, got h = {h}, ξ = {xi}")));
    }
    let step = match cfg.precision {
        Precision::DoubleDouble => TWO_PI_DD.div_f64(h),
        Precision::Double => Dd::from_f64(2.0 * PI / h),
    };
    let reach = cfg.k_factor * production_radius(h) + (xi.abs() * h / (2.0 * PI)).ceil() as usize + 2;
    let x = Dd::from_f64(xi);
    let squares: Vec<Dd> = (-(reach as i64)..=reach as i64)
        .map(|k| {
            let d = x - step * Dd::from_f64(k as f64);
            match cfg.precision {
                Precision::DoubleDouble => d * d,
                Precision::Double => Dd::from_f64(d.hi * d.hi),
            }
        })
        .collect();
    let min = squares.iter().copied().fold(Dd::from_f64(f64::INFINITY), |a, b| if b.to_f64() < a.to_f64() { b } else { a });
    let mut acc = Acc::new(cfg.precision);
    for s in &squares {
        let e = (*s - min).to_f64();
        acc.add(Dd::from_f64((-e / 4.0).exp()));
    }
    let numerator = (x * x - min).to_f64();
    let log_m = -numerator / 4.0 - acc.sum.to_f64().ln();
    Ok((log_m, log_m.exp()))
}

pub fn oracle_m(h: f64, xi: f64, cfg: &OracleConfig) -> Result<f64> {
    Ok(oracle_log_m(h, xi, cfg)?.1)
}

/// Dense collocation solve with its residual history.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolve {
    pub coeffs: LatticeArray,
    /// `‖e₀ − A b‖_∞` after the first solve and each accepted refinement step.
    pub residuals: Vec<f64>,
}

/// Largest system the oracle solver accepts.
pub const ORACLE_SIZE_CAP: usize = 4000;

struct Ldl {
    n: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// `A = L D Lᵀ` without pivoting (A is symmetric positive definite).
    fn factor(a: &[f64], n: usize) -> Result<Self> {
        let mut l = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let mut dj = a[j * n + j];
            for k in 0..j {
                dj -= l[j * n + k] * l[j * n + k] * d[k];
            }
            if !(dj > 0.0) {
                return Err(Error::Internal(format!("LDLᵀ pivot {j} is not positive ({dj:e})")));
            }
            d[j] = dj;
            l[j * n + j] = 1.0;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k] * d[k];
                }
                l[i * n + j] = v / dj;
            }
        }
        Ok(Self { n, l, d })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
        }
        y
    }
}

/// Solves `Σ_j b_j e^{−h²|i−j|²} = δ_{i0}` on the coefficient box by LDLᵀ,
/// then refines with residuals accumulated in double-double while they decrease.
pub fn oracle_lagrange_coeffs(grid: &GridSpec, cfg: &OracleConfig) -> Result<OracleSolve> {
    cfg.validate()?;
    let layout = LatticeArray::zeros(grid.dim, grid.coeff_radius);
    let n = layout.len();
    if n > ORACLE_SIZE_CAP {
        return Err(Error::Parameter(format!("oracle system of {n} unknowns exceeds {ORACLE_SIZE_CAP}")));
    }
    let h2 = grid.h * grid.h;
    let mut a = vec![0.0; n * n];
    let mut ii = vec![0i64; grid.dim];
    let mut jj = vec![0i64; grid.dim];
    for r in 0..n {
        layout.unflatten_into(r, &mut ii);
        for c in 0..n {
            layout.unflatten_into(c, &mut jj);
            let d2: i64 = ii.iter().zip(&jj).map(|(x, y)| (x - y) * (x - y)).sum();
            a[r * n + c] = (-h2 * d2 as f64).exp();
        }
    }
    let centre = layout.flat_index(&vec![0; grid.dim]).expect("origin is in the box");
    let ldl = Ldl::factor(&a, n)?;
    let residual = |b: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|r| {
                let mut acc = Dd::from_f64(if r == centre { 1.0 } else { 0.0 });
                for (c, &bc) in b.iter().enumerate() {
                    let (p, e) = two_prod(a[r * n + c], bc);
                    acc = acc - Dd::new(p, e);
                }
                acc.to_f64()
            })
            .collect()
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut rhs = vec![0.0; n];
    rhs[centre] = 1.0;
    let mut b = ldl.solve(&rhs);
    let mut r = residual(&b);
    let mut residuals = vec![norm(&r)];
    for _ in 0..cfg.max_refinements {
        let delta = ldl.solve(&r);
        let trial: Vec<f64> = b.iter().zip(&delta).map(|(x, d)| x + d).collect();
        let r_trial = residual(&trial);
        let nr = norm(&r_trial);
        if !(nr < *residuals.last().expect("non-empty")) {
            break;
        }
        b = trial;
        r = r_trial;
        residuals.push(nr);
    }
    Ok(OracleSolve { coeffs: LatticeArray::from_vec(grid.dim, grid.coeff_radius, b)?, residuals })
}

/// Uniform samples `values[i] = F(start + i·step)` of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSamples {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

/// `(2π)^{-1} ∫ F(ξ) e^{ixξ} dξ` by the composite trapezoid rule over the samples.
pub fn oracle_quadrature_ft(samples: &SymbolSamples, x: f64) -> Complex64 {
    let n = samples.values.len();
    let mut re = Dd::default();
    let mut im = Dd::default();
    for (i, &f) in samples.values.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let xi = samples.start + samples.step * i as f64;
        let (s, c) = (x * xi).sin_cos();
        re = re + Dd::from_f64(w * f * c);
        im = im + Dd::from_f64(w * f * s);
    }
    Complex64::new(re.to_f64(), im.to_f64()) * (samples.step / (2.0 * PI))
}

/// `h·m_h^∨(x)` from oracle samples of `m_h` on `|ξ| ≤ π/h + 60h/π`, at
/// `density_factor` times the frequency density of the production table.
pub fn oracle_chi(h: f64, x: f64, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    let band = PI / h + 60.0 * h / PI;
    let production_period = 2.0 * (x.abs() + 30.0 / h + 8.0 * h);
    let per_unit = cfg.density_factor as f64 * production_period / (2.0 * PI);
    let half = (band * per_unit).ceil() as i64;
    let step = band / half as f64;
    let values = (-half..=half).map(|i| oracle_m(h, step * i as f64, cfg)).collect::<Result<_>>()?;
    let samples = SymbolSamples { start: -band, step, values };
    Ok(h * oracle_quadrature_ft(&samples, x).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_arithmetic() {
        let third = Dd::from_f64(1.0).div_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        let big = Dd::from_f64(1e16) + Dd::from_f64(1.0) - Dd::from_f64(1e16);
        assert_eq!(big.to_f64(), 1.0);
    }

    #[test]
    fn m0_golden_and_positivity() {
        let cfg = OracleConfig::default();
        let m0 = oracle_m(1.0, 0.0, &cfg).unwrap();
        assert!((m0 - 0.999_896_6).abs() < 5e-8, "{m0}");
        for i in 0..10_000 {
            let xi = -40.0 + 80.0 * i as f64 / 9999.0;
            assert!(oracle_m(0.5, xi, &cfg).unwrap() > 0.0 || xi.abs() > 25.0);
        }
        assert!(OracleConfig { k_factor: 1, ..cfg }.validate().is_err());
    }

    #[test]
    fn ldl_refinement_residuals() {
        let grid = GridSpec::new(1.0, 1, 16, 4.0).unwrap();
        let sol = oracle_lagrange_coeffs(&grid, &OracleConfig::default()).unwrap();
        assert!(*sol.residuals.last().unwrap() < 1e-12, "{:?}", sol.residuals);
        assert!(sol.residuals.windows(2).all(|w| w[1] < w[0]));
        for j in 1..=16 {
            let (a, b) = (sol.coeffs.get(&[j]).unwrap(), sol.coeffs.get(&[-j]).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "j={j}: {a} {b}");
        }
    }

    #[test]
    fn trapezoid_transform_basics() {
        let zero = SymbolSamples { start: -3.0, step: 0.01, values: vec![0.0; 601] };
        assert_eq!(oracle_quadrature_ft(&zero, 1.3), Complex64::new(0.0, 0.0));
        let even = SymbolSamples {
            start: -3.0,
            step: 0.01,
            values: (0..601).map(|i| (-(-3.0 + 0.01 * i as f64).powi(2)).exp()).collect(),
        };
        let a = oracle_quadrature_ft(&even, 0.7);
        let b = oracle_quadrature_ft(&even, -0.7);
        assert!(a.im.abs() < 1e-15 && (a.re - b.re).abs() < 1e-15);
    }
}
