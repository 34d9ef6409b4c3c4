//! The Gaussian theta-quotient multiplier
//!
//! ```text
//! m_h(ξ) = e^{-ξ²/4} / Σ_k e^{-(ξ - 2πk/h)²/4} = 1 / d₀(ξ),
//! d₀(ξ)  = Σ_k exp(e_k),   e_k = πkξ/h − π²k²/h²,
//! ```
//!
//! which is `h^{-n}` times the Fourier transform of the Lagrange function on
//! `hℤⁿ`. The exponents `e_k` form a downward parabola in `k` with vertex at
//! `c = ξh/(2π)`, so every quantity is evaluated as a log-sum-exp over a
//! window of `2K + 1` shifts centred on the nearest integer to `c`. Terms
//! outside the window are below `rel_tol` relative to the largest one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default relative truncation tolerance for the theta sums.
pub const DEFAULT_REL_TOL: f64 = 1e-17;

/// Immutable evaluator for `m_h` and its derivatives in a given dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierContext {
    h: f64,
    dim: usize,
    series_radius: usize,
    rel_tol: f64,
}

/// Normalised moments of the shift weights `w_k ∝ exp(e_k)` at one frequency.
#[derive(Debug, Clone, Copy)]
struct SeriesState {
    log_d0: f64,
    /// Σ w_k a_k with a_k = πk/h.
    mean: f64,
    /// Σ w_k (a_k − mean)².
    variance: f64,
}

impl MultiplierContext {
    pub fn new(h: f64, dim: usize) -> Result<Self> {
        Self::with_tolerance(h, dim, DEFAULT_REL_TOL)
    }

    pub fn with_tolerance(h: f64, dim: usize, rel_tol: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("grid spacing h must be positive, got {h}")));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
            return Err(Error::Parameter(format!("rel_tol must lie in (0, 1e-6], got {rel_tol}")));
        }
        let k = ((h / PI) * (1.0 / rel_tol).ln().sqrt()).ceil() as usize + 1;
        Ok(Self { h, dim, series_radius: k.max(2), rel_tol })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of shifts `K` kept on each side of the dominant one.
    pub fn series_radius(&self) -> usize {
        self.series_radius
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Relative size of the first discarded term, `exp(−π²(K+1)²/h²)`.
    pub fn tail_bound(&self) -> f64 {
        let k = (self.series_radius + 1) as f64;
        (-(PI * k / self.h).powi(2)).exp()
    }

    fn series(&self, xi: f64) -> Result<SeriesState> {
        ensure_finite("xi", xi)?;
        // m is even and m′ odd: evaluate at |ξ| so that symmetry holds bit-for-bit.
        let sign = if xi < 0.0 { -1.0 } else { 1.0 };
        let xi = xi.abs();
        let a = PI / self.h;
        let centre = xi * self.h / (2.0 * PI);
        let k0 = centre.round();
        // e_{k0} = (πk0/h)(ξ − πk0/h); offsets relative to it factor as
        // e_k − e_{k0} = −(π/h)²(k − k0)(k + k0 − 2c), which avoids cancellation at large |ξ|.
        let e0 = a * k0 * (xi - a * k0);
        let radius = self.series_radius as i64;
        let mut offsets = [0.0f64; 64];
        let mut dyn_offsets;
        let count = (2 * radius + 1) as usize;
        let offs: &mut [f64] = if count <= offsets.len() {
            &mut offsets[..count]
        } else {
            dyn_offsets = vec![0.0; count];
            &mut dyn_offsets
        };
        let mut max = f64::NEG_INFINITY;
        for (slot, d) in offs.iter_mut().zip(-radius..=radius) {
            let d = d as f64;
            let delta = -(a * a) * d * (d + 2.0 * (k0 - centre));
            *slot = delta;
            max = max.max(delta);
        }
        let sum: f64 = offs.iter().map(|delta| (delta - max).exp()).sum();
        // Pair shifts ±d about k0 so the odd part is formed by a sinh and does
        // not cancel when ξ sits near a lattice centre: with c′ = c − k0,
        // w_d − w_{−d} ∝ 2 e^{−a²d²} sinh(2a²dc′).
        let shift = centre - k0;
        let mut odd = 0.0;
        for d in 1..=radius {
            let d = d as f64;
            // 2e^{e}·sinh(x) = sgn(x)·e^{e+|x|}·(1 − e^{−2|x|}); e + |x| is a
            // normalised log weight, so this cannot overflow for small h.
            let x = 2.0 * a * a * d * shift;
            odd += d * x.signum() * (-(a * a) * d * d - max + x.abs()).exp() * -(-2.0 * x.abs()).exp_m1();
        }
        let rel_mean = a * odd / sum;
        let mean = a * k0 + rel_mean;
        let mut variance = 0.0;
        for (delta, d) in offs.iter().zip(-radius..=radius) {
            let w = (delta - max).exp() / sum;
            let dev = a * d as f64 - rel_mean;
            variance += w * dev * dev;
        }
        Ok(SeriesState { log_d0: e0 + max + sum.ln(), mean: sign * mean, variance })
    }

    /// `ln d₀(ξ)`.
    pub fn log_d0(&self, xi: f64) -> Result<f64> {
        Ok(self.series(xi)?.log_d0)
    }

    /// `d₀(ξ) = 1 + 2Σ_{k≥1} e^{−π²k²/h²} cosh(πkξ/h)`. Overflows to `+∞`
    /// once `ξ²/4` exceeds the exponent range; use [`Self::log_d0`] there.
    pub fn d0(&self, xi: f64) -> Result<f64> {
        Ok(self.log_d0(xi)?.exp())
    }

    /// `d₁ = d₀′ = m_h·d₀·(Σ a_k w_k)` evaluated as `d₀ · mean`.
    pub fn d1(&self, xi: f64) -> Result<f64> {
        let s = self.series(xi)?;
        Ok(s.log_d0.exp() * s.mean)
    }

    /// `d₂ = d₁′ = d₀·(mean² + variance)`.
    pub fn d2(&self, xi: f64) -> Result<f64> {
        let s = self.series(xi)?;
        Ok(s.log_d0.exp() * (s.mean * s.mean + s.variance))
    }

    /// `ln m_h(ξ)`.
    pub fn log_m(&self, xi: f64) -> Result<f64> {
        Ok(-self.log_d0(xi)?)
    }

    /// `m_h(ξ) ∈ (0, 1]`; underflows to zero only when `ln m_h` is below the
    /// smallest subnormal.
    pub fn m(&self, xi: f64) -> Result<f64> {
        Ok(self.log_m(xi)?.exp())
    }

    /// `m_h′(ξ) = −m_h² d₁ = −m_h · Σ w_k (πk/h)`.
    pub fn m_prime(&self, xi: f64) -> Result<f64> {
        let s = self.series(xi)?;
        Ok(-(-s.log_d0).exp() * s.mean)
    }

    /// `m_h″(ξ) = m_h [2(Σ w_k a_k)² − Σ w_k a_k²] = m_h [mean² − variance]`.
    ///
    /// Both weighted sums are averages of lattice values, so no term can
    /// overflow and the difference does not cancel catastrophically.
    pub fn m_second(&self, xi: f64) -> Result<f64> {
        let s = self.series(xi)?;
        Ok((-s.log_d0).exp() * (s.mean * s.mean - s.variance))
    }

    /// `ln m_h^{[n]}(ξ) = Σ_i ln m_h(ξ_i)`.
    pub fn log_m_tensor(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::Domain(format!(
                "frequency vector has length {} but the context dimension is {}",
                xi.len(),
                self.dim
            )));
        }
        xi.iter().try_fold(0.0, |acc, &x| Ok(acc + self.log_m(x)?))
    }

    pub fn m_tensor(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.log_m_tensor(xi)?.exp())
    }

    /// `Σ m_h(ξ − 2πk/h)` over `|k − k₀| ≤ shift_radius`, where `k₀` is the
    /// shift that brings `ξ` closest to the origin. The full sum is exactly 1.
    pub fn alias_sum(&self, xi: f64, shift_radius: usize) -> Result<f64> {
        ensure_finite("xi", xi)?;
        if shift_radius < self.series_radius {
            return Err(Error::Parameter(format!(
                "shift radius {shift_radius} is below the series radius {}",
                self.series_radius
            )));
        }
        let period = 2.0 * PI / self.h;
        let k0 = (xi / period).round() as i64;
        let r = shift_radius as i64;
        let mut total = 0.0;
        for k in (k0 - r)..=(k0 + r) {
            total += self.m(xi - period * k as f64)?;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from 40-digit direct summation of the cosh series (|k| ≤ 40).
    const D0_H1_ZERO: f64 = 1.000_103_446_372_407_6;
    const M_H1_ZERO: f64 = 0.999_896_564_327_637_4;
    const M_HALF_TWO_PI_OVER_H: f64 = 7.157_165_835_186_041e-18;
    const M_H1_XI30: f64 = 3.158_632_012_285_428e-98;

    #[test]
    fn series_radius_rule() {
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        assert_eq!(ctx.series_radius(), 3);
        assert!(ctx.tail_bound() < ctx.rel_tol());
        assert_eq!(MultiplierContext::new(0.25, 1).unwrap().series_radius(), 2);
        assert_eq!(MultiplierContext::new(8.0, 1).unwrap().series_radius(), 17);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MultiplierContext::new(0.0, 1).is_err());
        assert!(MultiplierContext::new(1.0, 0).is_err());
        assert!(MultiplierContext::with_tolerance(1.0, 1, 1e-3).is_err());
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        assert!(matches!(ctx.d0(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(ctx.m(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(ctx.m_tensor(&[0.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_values() {
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        assert!(rel(ctx.d0(0.0).unwrap(), D0_H1_ZERO) < 1e-15);
        assert!(rel(ctx.m(0.0).unwrap(), M_H1_ZERO) < 1e-15);
        assert!(rel(ctx.m(30.0).unwrap(), M_H1_XI30) < 1e-13);
        let half = MultiplierContext::new(0.5, 1).unwrap();
        assert!(rel(half.d0(PI / 0.5).unwrap(), 2.0) < 1e-15);
        assert!(rel(half.m(2.0 * PI / 0.5).unwrap(), M_HALF_TWO_PI_OVER_H) < 1e-13);
    }

    #[test]
    fn shifted_form_matches_at_half_period() {
        // d₀(ξ) = e^{ξ²/4} Σ_k e^{−(ξ − 2πk/h)²/4}, summed directly with |k| ≤ 20.
        let h = 0.5;
        let xi = PI / h;
        let direct: f64 = (-20..=20)
            .map(|k| (xi * xi / 4.0 - (xi - 2.0 * PI * k as f64 / h).powi(2) / 4.0).exp())
            .sum();
        let ctx = MultiplierContext::new(h, 1).unwrap();
        assert!(rel(ctx.d0(xi).unwrap(), direct) < 1e-14);
    }

    #[test]
    fn derivative_reference_values() {
        // mpmath derivatives of 1/d₀ at ξ = t/h.
        let cases = [
            (1.0, 0.3, -3.535_861_081_812_553e-4, -1.508_286_001_860_614e-3),
            (1.0, 1.7, -3.318_491_200_099_396e-2, -1.020_320_171_148_482_5e-1),
            (1.0, 5.0, -9.100_301_413_615_281e-3, 2.842_332_650_954_827e-2),
            (0.5, 1.7, -8.524_720_385_525_668e-8, -5.356_239_642_073_2e-7),
            (0.5, 5.0, -4.528_055_186_995_173e-10, 2.845_060_981_692_573e-9),
            (0.25, 5.0, -3.389_512_470_293_457e-40, 4.259_386_990_369_967e-39),
        ];
        for (h, t, d1, d2) in cases {
            let ctx = MultiplierContext::new(h, 1).unwrap();
            let xi = t / h;
            assert!(rel(ctx.m_prime(xi).unwrap(), d1) < 1e-11, "m' at h={h} t={t}");
            assert!(rel(ctx.m_second(xi).unwrap(), d2) < 1e-10, "m'' at h={h} t={t}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for h in [1.0, 0.5, 0.25] {
            let ctx = MultiplierContext::new(h, 1).unwrap();
            for t in [0.3, 1.7, 5.0] {
                let xi = t / h;
                let step = f64::EPSILON.cbrt() * xi.abs().max(1.0);
                let fd1 = (ctx.m(xi + step).unwrap() - ctx.m(xi - step).unwrap()) / (2.0 * step);
                let fd2 = (ctx.m_prime(xi + step).unwrap() - ctx.m_prime(xi - step).unwrap()) / (2.0 * step);
                let d1 = ctx.m_prime(xi).unwrap();
                let d2 = ctx.m_second(xi).unwrap();
                // Skip where the increment of m over the stencil is near roundoff.
                if d1.abs() > 1e-250 && d1.abs() * step > 1e-8 * ctx.m(xi).unwrap() {
                    assert!(rel(fd1, d1) < 1e-6, "h={h} t={t}: {fd1} vs {d1}");
                }
                if d2.abs() > 1e-250 && d2.abs() * step > 1e-8 * d1.abs() {
                    assert!(rel(fd2, d2) < 1e-6, "h={h} t={t}: {fd2} vs {d2}");
                }
            }
        }
    }

    #[test]
    fn derivative_signs() {
        let ctx = MultiplierContext::new(0.7, 1).unwrap();
        assert_eq!(ctx.m_prime(0.0).unwrap(), 0.0);
        for i in 1..200 {
            let xi = i as f64 * 0.173;
            assert!(ctx.m_prime(xi).unwrap() < 0.0);
            assert!(ctx.m_prime(-xi).unwrap() > 0.0);
        }
    }

    #[test]
    fn closed_forms_of_d1_and_d2() {
        // d₁ = 2Σ(πk/h)e^{−π²k²/h²}sinh(πkξ/h), d₂ = 2Σ(πk/h)²e^{−π²k²/h²}cosh(πkξ/h).
        let h = 0.8;
        let ctx = MultiplierContext::new(h, 1).unwrap();
        for xi in [0.0, 0.9, 2.5, 4.0] {
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for k in 1..30 {
                let a = PI * k as f64 / h;
                let g = (-(a * a)).exp();
                d1 += 2.0 * a * g * (a * xi).sinh();
                d2 += 2.0 * a * a * g * (a * xi).cosh();
            }
            assert!((ctx.d1(xi).unwrap() - d1).abs() <= 1e-13 * d1.abs().max(1.0));
            assert!(rel(ctx.d2(xi).unwrap(), d2) < 1e-13);
            // m″ = 2m³d₁² − m²d₂ where that form is still benign.
            let m = ctx.m(xi).unwrap();
            let raw = 2.0 * m.powi(3) * d1 * d1 - m * m * d2;
            assert!((ctx.m_second(xi).unwrap() - raw).abs() < 1e-12 * d2.max(1.0));
        }
    }

    #[test]
    fn tensor_product() {
        let ctx = MultiplierContext::new(0.5, 2).unwrap();
        let one = MultiplierContext::new(0.5, 1).unwrap();
        let m0 = one.m(0.0).unwrap();
        assert_eq!(ctx.m_tensor(&[0.0, 0.0]).unwrap(), m0 * m0);
        let (a, b) = (3.1, -7.4);
        let prod = one.m(a).unwrap() * one.m(b).unwrap();
        assert!(rel(ctx.m_tensor(&[a, b]).unwrap(), prod) < 1e-14);
        // One coordinate far out: still a positive normal number.
        let ctx3 = MultiplierContext::new(1.0, 3).unwrap();
        let v = ctx3.m_tensor(&[0.1, -0.2, 45.0]).unwrap();
        let log = ctx3.log_m_tensor(&[0.1, -0.2, 45.0]).unwrap();
        assert!(v > 0.0 && v < 1e-200);
        assert!(rel(v.ln(), log) < 1e-12);
    }

    #[test]
    fn alias_sum_is_one_at_fixed_points() {
        let ctx = MultiplierContext::new(1.0, 1).unwrap();
        let r = ctx.series_radius() + 2;
        assert!((ctx.alias_sum(PI, r).unwrap() - 1.0).abs() < 1e-12);
        assert!((ctx.alias_sum(0.0, r).unwrap() - 1.0).abs() < 1e-12);
        assert!(ctx.alias_sum(0.0, 1).is_err());
    }

    #[test]
    fn monotone_on_dense_grid() {
        for h in [1.0, 0.5, 0.25] {
            let ctx = MultiplierContext::new(h, 1).unwrap();
            let m0 = ctx.m(0.0).unwrap();
            assert!(m0 <= 1.0);
            let mut prev = m0;
            for i in 1..=10_000 {
                let xi = i as f64 * (4.0 * PI / h) / 10_000.0;
                let v = ctx.m(xi).unwrap();
                // m is flat to machine precision near 0 for small h; the sign of m′ is strict.
                assert!(v > 0.0 && v <= prev, "h={h} xi={xi}");
                assert!(ctx.m_prime(xi).unwrap() < 0.0 || v < 1e-300, "h={h} xi={xi}");
                assert_eq!(v, ctx.m(-xi).unwrap());
                prev = v;
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(h in 0.2f64..2.0, t in -10.0f64..10.0) {
            let ctx = MultiplierContext::new(h, 1).unwrap();
            let xi = t * PI / h;
            let s = ctx.alias_sum(xi, ctx.series_radius() + 2).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }

        #[test]
        fn bounded_and_even(h in 0.1f64..3.0, xi in -200.0f64..200.0) {
            let ctx = MultiplierContext::new(h, 1).unwrap();
            let v = ctx.m(xi).unwrap();
            prop_assert!(v >= 0.0 && v <= ctx.m(0.0).unwrap());
            prop_assert_eq!(v, ctx.m(-xi).unwrap());
            prop_assert!(ctx.log_m(xi).unwrap() <= 0.0);
        }
    }
}
