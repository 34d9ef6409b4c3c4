//! Decay of `m_h^∨`, multiplier-norm bounds and aliasing diagnostics.
//!
//! Inverse transforms are reported as `h·m_h^∨ = χ_h`, the normalisation in
//! which `m_h^∨(0) = 1`; `∫ m_h = 2π/h` by the partition identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::fft::{fast_len, fft_cube, signed_index};
use crate::fit::{fit_line, LineFit};
use crate::lagrange::{chi_table, GridSpec};
use crate::multiplier::MultiplierContext;
use crate::norms::{lp_norm, PNorm};
use crate::quad::adaptive;

/// Fine points per lattice step used for kernel norms.
pub const KERNEL_FINE_FACTOR: usize = 8;

fn require_1d(ctx: &MultiplierContext) -> Result<()> {
    if ctx.dim() != 1 {
        return Err(Error::Parameter(format!("a one-dimensional context is required, got dimension {}", ctx.dim())));
    }
    Ok(())
}

/// Samples of `h·m_h^∨` on `[0, x_max]` with the two envelope checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub h: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |v(x)| / min(1, 2/|x|)`; the first envelope holds when this is at most 1.
    pub c1: f64,
    /// `max |v(x)| h³ x²`, the smallest constant in the second envelope.
    pub c2: f64,
}

impl DecayProfile {
    pub fn value_at_zero(&self) -> f64 {
        self.values[0]
    }

    /// Every sample satisfies `|v| ≤ min(1, 2/|x|)(1 + slack)`.
    pub fn first_envelope_holds(&self, slack: f64) -> bool {
        self.c1 <= 1.0 + slack
    }

    /// Every sample satisfies `|v| ≤ c/(h³x²)`.
    pub fn second_envelope_holds(&self, c: f64) -> bool {
        self.c2 <= c
    }
}

/// `h·m_h^∨` at `n_samples` equispaced points of `[0, x_max]`, from a trapezoid
/// rule over the full band of `m_h` evaluated by FFT.
pub fn inverse_transform_profile(ctx: &MultiplierContext, x_max: f64, n_samples: usize) -> Result<DecayProfile> {
    require_1d(ctx)?;
    if !(x_max > 0.0 && x_max.is_finite()) || n_samples < 2 {
        return Err(Error::Parameter(format!("need x_max > 0 and at least 2 samples, got {x_max}, {n_samples}")));
    }
    let h = ctx.h();
    let grid = GridSpec::new(h, 1, 8, (x_max + h).max(4.0 * h))?;
    let table = chi_table(&grid, KERNEL_FINE_FACTOR)?;
    let step = x_max / (n_samples - 1) as f64;
    let x: Vec<f64> = (0..n_samples).map(|i| step * i as f64).collect();
    let values: Vec<f64> = x.iter().map(|&t| table.chi_1d(t)).collect();
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for (&t, &v) in x.iter().zip(&values) {
        c1 = c1.max(v.abs() / (2.0 / t).min(1.0));
        c2 = c2.max(v.abs() * h.powi(3) * t * t);
    }
    Ok(DecayProfile { h, x, values, c1, c2 })
}

/// `∫|m_h′|` by adaptive quadrature; equals `2m_h(0)` since `m_h` decreases on `(0, ∞)`.
pub fn m_prime_l1(ctx: &MultiplierContext) -> Result<f64> {
    require_1d(ctx)?;
    let h = ctx.h();
    // m has decayed below 1e-300 well before 6π/h.
    let edge = 6.0 * PI / h;
    let mid = PI / h;
    let mut err = None;
    let mut integrand = |xi: f64| match ctx.m_prime(xi) {
        Ok(v) => v.abs(),
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    // Split at the transition, where m' is sharply peaked.
    let (a, _) = adaptive(&mut integrand, 0.0, mid, 1e-17, 1e-13, 4000);
    let (b, _) = adaptive(&mut integrand, mid, edge, 1e-17, 1e-13, 4000);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(2.0 * (a + b))
}

/// `‖m_h^∨‖₁` by a Riemann sum of `|χ_h|/h` at spacing `h/8` over `|x| ≤ 40/h + 50`.
pub fn kernel_l1(ctx: &MultiplierContext) -> Result<f64> {
    require_1d(ctx)?;
    let h = ctx.h();
    let radius = 40.0 / h + 50.0;
    let grid = GridSpec::new(h, 1, 8, radius)?;
    let line = chi_table(&grid, KERNEL_FINE_FACTOR)?.line_samples();
    Ok(line.data.iter().map(|v| v.abs()).sum::<f64>() * line.spacing / h)
}

/// Lower and upper bounds on `‖m_h‖_{M_p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub h: f64,
    pub p: PNorm,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Test function that attained the lower bound.
    pub test_family: String,
    pub applications: usize,
}

/// Default number of operator applications in the lower-bound search.
pub const DEFAULT_BUDGET: usize = 200;
const DETERMINISTIC_PATTERNS: usize = 16;
const RANDOM_BAND_FUNCTIONS: usize = 64;
/// Largest search torus (fine points).
const SEARCH_POINTS_CAP: usize = 1 << 17;

/// The operator `f ↦ (f̂ m_h)^∨` on a periodic grid of spacing `h/8`.
struct DiscreteMultiplier {
    n: usize,
    symbol: Vec<f64>,
}

impl DiscreteMultiplier {
    fn new(ctx: &MultiplierContext) -> Result<Self> {
        let h = ctx.h();
        let delta = h / KERNEL_FINE_FACTOR as f64;
        let want = ((24.0 / h + 16.0) / delta).ceil() as usize;
        let n = fast_len(want.min(SEARCH_POINTS_CAP));
        let period = n as f64 * delta;
        let symbol = (0..n).map(|s| ctx.m(2.0 * PI * signed_index(s, n) as f64 / period)).collect::<Result<_>>()?;
        Ok(Self { n, symbol })
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_cube(&mut data, self.n, 1, false);
        for (v, &m) in data.iter_mut().zip(&self.symbol) {
            *v *= m;
        }
        fft_cube(&mut data, self.n, 1, true);
        data.iter().map(|v| v.re / self.n as f64).collect()
    }

    fn ratio(&self, f: &[f64], p: PNorm) -> f64 {
        let num = lp_norm(&self.apply(f), p, 1.0, 1);
        let den = lp_norm(f, p, 1.0, 1);
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// The convolution kernel, centred at index 0.
    fn kernel(&self) -> Vec<f64> {
        let mut delta = vec![0.0; self.n];
        delta[0] = 1.0;
        self.apply(&delta)
    }
}

fn deterministic_patterns(op: &DiscreteMultiplier) -> Vec<(String, Vec<f64>)> {
    let n = op.n;
    let kernel = op.kernel();
    let mut out = Vec::new();
    // Extremal for p = ∞: f(x) = sign k(−x) gives (Tf)(0) = Σ|k|.
    out.push(("kernel_sign".to_string(), (0..n).map(|i| kernel[(n - i) % n].signum()).collect()));
    let mut delta = vec![0.0; n];
    delta[0] = 1.0;
    out.push(("delta".to_string(), delta));
    for q in [1usize, 2, 4] {
        out.push((format!("cos_{q}"), (0..n).map(|i| (2.0 * PI * (q * i) as f64 / n as f64).cos()).collect()));
    }
    out.push(("constant".to_string(), vec![1.0; n]));
    for w in [1usize, 4, 8, 16, 64, 256] {
        let w = w.min(n / 2);
        out.push((format!("box_{w}"), (0..n).map(|i| if i < w { 1.0 } else { 0.0 }).collect()));
    }
    for w in [8usize, 32, 128] {
        let w = w.min(n / 2);
        out.push((format!("square_{w}"), (0..n).map(|i| if (i / w) % 2 == 0 { 1.0 } else { -1.0 }).collect()));
    }
    out.truncate(DETERMINISTIC_PATTERNS);
    out
}

/// Random real data with Fourier support in `|s| ≤ band`.
fn random_band_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let band = rng.random_range(1..=(n / 2).max(1));
    let mut data = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..=band.min(n / 2) {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        data[s] = c;
        if s > 0 {
            data[n - s] = c.conj();
        }
    }
    data[0].im = 0.0;
    fft_cube(&mut data, n, 1, true);
    data.iter().map(|v| v.re).collect()
}

/// Bounds on `‖m_h‖_{M_p}` for `p ∈ {1, 2, 4, ∞}`.
///
/// Upper bounds: `m_h(0)` for `p = 2`, `‖m_h^∨‖₁` for `p ∈ {1, ∞}`, and
/// `√(M₂ M_∞)` by Riesz–Thorin for `p = 4`. The lower bound is the best ratio
/// `‖Tf‖_p/‖f‖_p` over fixed patterns, seeded random band functions and a
/// seeded hill climb, `budget` applications in total.
pub fn mp_norm_bounds(ctx: &MultiplierContext, p: PNorm, budget: usize, seed: u64) -> Result<NormEstimate> {
    require_1d(ctx)?;
    if !p.is_harness_value() {
        return Err(Error::Parameter(format!("p must be 1, 2, 4 or inf, got {p}")));
    }
    let h = ctx.h();
    let upper_bound = match p {
        PNorm::Finite(q) if q == 2.0 => ctx.m(0.0)?,
        PNorm::Finite(q) if q == 4.0 => (ctx.m(0.0)? * kernel_l1(ctx)?).sqrt(),
        _ => kernel_l1(ctx)?,
    };
    let op = DiscreteMultiplier::new(ctx)?;
    let mut best = (0.0f64, String::from("none"), Vec::new());
    let mut used = 0usize;
    let consider = |name: String, f: Vec<f64>, used: &mut usize, best: &mut (f64, String, Vec<f64>)| {
        *used += 1;
        let r = op.ratio(&f, p);
        if r > best.0 {
            *best = (r, name, f);
        }
    };
    for (name, f) in deterministic_patterns(&op) {
        if used >= budget {
            break;
        }
        consider(name, f, &mut used, &mut best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..RANDOM_BAND_FUNCTIONS {
        if used >= budget {
            break;
        }
        let f = random_band_function(&mut rng, op.n);
        consider(format!("random_band_{i}"), f, &mut used, &mut best);
    }
    // Hill climb: perturb the current best by a random band function.
    let mut scale = 0.5;
    while used < budget && !best.2.is_empty() {
        let noise = random_band_function(&mut rng, op.n);
        let amp = best.2.iter().fold(0.0f64, |a, v| a.max(v.abs())) / noise.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        let trial: Vec<f64> = best.2.iter().zip(&noise).map(|(a, b)| a + scale * amp * b).collect();
        let before = best.0;
        let name = if best.1.ends_with("+climb") { best.1.clone() } else { format!("{}+climb", best.1) };
        consider(name, trial, &mut used, &mut best);
        if best.0 <= before {
            scale *= 0.7;
        }
    }
    Ok(NormEstimate { h, p, lower_bound: best.0, upper_bound, test_family: best.1, applications: used })
}

/// `∫ |d²/dξ² [ξ^k ρ̂(hξ − β) m_h(ξ)]| dξ`, kept in log form because `m_h` is tiny there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliasingValue {
    pub beta: f64,
    pub k: usize,
    /// May underflow to zero; `log_value` does not.
    pub value: f64,
    pub log_value: f64,
}

/// `ξ^k ρ̂(hξ − β) m_h(ξ) e^{−shift}`; zero outside `|hξ − β| < π + ε`.
pub fn aliasing_integrand(ctx: &MultiplierContext, spec: &CutoffSpec, k: usize, beta: f64, xi: f64, shift: f64) -> Result<f64> {
    let r = spec.rho_hat(ctx.h() * xi - beta);
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(xi.powi(k as i32) * r * (ctx.log_m(xi)? - shift).exp())
}

/// The aliasing integral for one shift `β` (`|β| ≥ 2π`, `k ≤ 6`).
///
/// The second derivative is a central difference with Richardson
/// extrapolation, at a step `10⁻³` of the shortest variation length of the
/// integrand (`ε/h` for the cutoff, `1/|(ln m)′|` for the multiplier).
pub fn aliasing_diagnostic(ctx: &MultiplierContext, spec: &CutoffSpec, k: usize, beta: f64) -> Result<AliasingValue> {
    require_1d(ctx)?;
    if beta.abs() < 2.0 * PI || k > 6 {
        return Err(Error::Parameter(format!("need |beta| ≥ 2π and k ≤ 6, got beta = {beta}, k = {k}")));
    }
    let h = ctx.h();
    let lo = (beta - spec.support) / h;
    let hi = (beta + spec.support) / h;
    let centre = beta / h;
    let shift = ctx.log_m(centre)?;
    let slope = (ctx.m_prime(centre)? / ctx.m(centre)?).abs();
    let slope = if slope.is_finite() { slope } else { (ctx.log_m(centre + 1e-3)? - shift).abs() / 1e-3 };
    let length = (spec.eps / h).min(1.0 / slope.max(1e-300));
    let step = 1e-3 * length;
    let mut err = None;
    let mut u = |x: f64| match aliasing_integrand(ctx, spec, k, beta, x, shift) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let mut second = |x: f64| {
        let d = |s: f64, u: &mut dyn FnMut(f64) -> f64| (u(x + s) - 2.0 * u(x) + u(x - s)) / (s * s);
        let coarse = d(step, &mut u);
        let fine = d(0.5 * step, &mut u);
        ((4.0 * fine - coarse) / 3.0).abs()
    };
    let (integral, _) = adaptive(&mut second, lo, hi, 0.0, 1e-8, 4000);
    if let Some(e) = err {
        return Err(e);
    }
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(Error::Accuracy(format!("aliasing integral is not positive and finite: {integral}")));
    }
    let log_value = shift + integral.ln();
    Ok(AliasingValue { beta, k, value: log_value.exp(), log_value })
}

/// Fit of `ln V` against `(β/h)²`; the decay constant is `c = −slope`.
pub fn fit_aliasing_decay(h: f64, values: &[AliasingValue]) -> Result<LineFit> {
    let x: Vec<f64> = values.iter().map(|v| (v.beta / h).powi(2)).collect();
    let y: Vec<f64> = values.iter().map(|v| v.log_value).collect();
    fit_line(&x, &y)
}
