//! Stability factors `Q_p(h)` for band-limited inputs.
//!
//! Each trial draws `f = Σ_m a_m φ(x/h − m)` on a torus of `P` lattice points
//! with seeded uniform `a_m ∈ [−1, 1]`. Since `φ(j) = δ_{j0}`, `f(hj) = a_j`,
//! so `I_h f = Σ_j a_j χ_h(x − hj)` on the same torus. The ratio
//! `|I_h f|_{W_p^k} / ‖f‖_{W_p^k}` is formed with exact spectral derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::fit::affine_envelope;
use crate::lattice::LatticeArray;
use crate::multiplier::MultiplierContext;
use crate::norms::{grid_lp_norm, multi_indices, PNorm};
use crate::quasi::quasi_synthesis;
use crate::spectral::{symbol_samples, Synthesis};

use super::config::SweepConfig;
use super::convergence::{check_hypothesis, LOGFACTOR_HOLDOUT, LOGFACTOR_SLACK};
use super::report::{ErrorReport, QRow};

/// `max_{|α| = k} ‖D^α u‖_p`.
fn seminorm(syn: &Synthesis, k: usize, p: PNorm) -> f64 {
    multi_indices(syn.dim(), k).iter().map(|a| grid_lp_norm(&syn.derivative(a), p)).fold(0.0, f64::max)
}

/// `|I_h f|_{W_p^k} / (‖f‖_p + |f|_{W_p^k})` for `f = Σ a_m φ(x/h − m)` on a
/// torus holding exactly the coefficient box.
pub fn stability_ratio(coeffs: &LatticeArray, h: f64, spec: &CutoffSpec, p: PNorm, k: usize, fine_factor: usize) -> Result<f64> {
    let dim = coeffs.dim();
    let torus = coeffs.side();
    let f = quasi_synthesis(coeffs, h, torus, fine_factor, spec)?;
    let ctx = MultiplierContext::new(h, dim)?;
    let symbol = symbol_samples(h, torus, fine_factor, |xi| ctx.m(xi))?;
    let interp = Synthesis::new(coeffs, h, torus, fine_factor, &symbol)?;
    let denom = grid_lp_norm(&f.values(), p) + seminorm(&f, k, p);
    if denom == 0.0 {
        return Err(Error::Domain("the trial function is zero".into()));
    }
    Ok(seminorm(&interp, k, p) / denom)
}

/// Coefficients for trial `trial` at level `level`: one ChaCha stream per pair.
pub fn trial_coefficients(seed: u64, level: usize, trial: usize, trials: usize, radius: usize) -> LatticeArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((level * trials + trial) as u64);
    LatticeArray::from_fn(1, radius, |_| rng.random_range(-1.0..=1.0))
}

/// `Q_p(h)` estimates over `h_list`, with `trials` random inputs per level.
pub fn run_stability(
    spec: &CutoffSpec,
    p: PNorm,
    k: usize,
    h_list: &[f64],
    trials: usize,
    config: &SweepConfig,
) -> Result<ErrorReport> {
    config.validate()?;
    check_hypothesis(1, p, k)?;
    if trials == 0 || h_list.is_empty() {
        return Err(Error::Parameter("need at least one h and one trial".into()));
    }
    if h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::Parameter(format!("h values must be positive: {h_list:?}")));
    }
    let radius = (config.stability_points - 1) / 2;
    let jobs: Vec<(usize, usize)> = (0..h_list.len()).flat_map(|l| (0..trials).map(move |t| (l, t))).collect();
    // Collected in (level, trial) order whatever the scheduling.
    let ratios: Vec<f64> = jobs
        .par_iter()
        .map(|&(l, t)| {
            let coeffs = trial_coefficients(config.seed, l, t, trials, radius);
            stability_ratio(&coeffs, h_list[l], spec, p, k, config.fine_factor)
        })
        .collect::<Result<_>>()?;
    let mut report = ErrorReport::new("stability", &format!("phi_eps{}", spec.eps), 1, p, k);
    report.seed = config.seed;
    report.config = config.echo();
    report.config.insert("eps".into(), spec.eps.to_string());
    report.config.insert("trials".into(), trials.to_string());
    report.config.insert("h_list".into(), h_list.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","));
    for (l, &h) in h_list.iter().enumerate() {
        let chunk = &ratios[l * trials..(l + 1) * trials];
        let q_max = chunk.iter().copied().fold(0.0, f64::max);
        let q_mean = chunk.iter().sum::<f64>() / trials as f64;
        report.q_factors.push(QRow { h, q_max, q_mean, trials });
    }
    let qs: Vec<f64> = report.q_factors.iter().map(|q| q.q_max).collect();
    let (lo, hi) = qs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &q| (a.min(q), b.max(q)));
    report.summary.insert("q_variation".into(), hi / lo);
    if qs.len() >= LOGFACTOR_HOLDOUT + 2 {
        let x: Vec<f64> = h_list.iter().map(|h| 1.0 + h.ln().abs()).collect();
        let env = affine_envelope(&x, &qs, LOGFACTOR_HOLDOUT, LOGFACTOR_SLACK)?;
        report.summary.insert("envelope_slope".into(), env.slope);
        report.summary.insert("envelope_max_excess".into(), env.max_excess);
        report.summary.insert("envelope_holds".into(), if env.holds { 1.0 } else { 0.0 });
    }
    Ok(report)
}
