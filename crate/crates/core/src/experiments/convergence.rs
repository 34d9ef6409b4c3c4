//! Convergence sweeps on a periodic model.
//!
//! The data box `[−R, R]ⁿ` (plus optional padding) is one period of a torus.
//! Targets are compactly supported inside it, so the periodised target equals
//! the target on the box, and `f − Af` is measured on the `h/M` grid of the
//! whole period.

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::fit::{affine_envelope, convergence_order, fit_line, EnvelopeCheck, LineFit};
use crate::interpolator::{interpolate_grid_spectral, torus_length, Padding, SampledField, SpectralOptions};
use crate::lagrange::GridSpec;
use crate::lattice::GridValues;
use crate::multiplier::MultiplierContext;
use crate::norms::{lp_norm, PNorm};
use crate::quasi::quasi_synthesis;
use crate::spectral::Synthesis;

use super::config::SweepConfig;
use super::report::{ErrorReport, ErrorRow};
use super::targets::TargetFunction;

/// The approximation operator being measured.
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    /// The Gaussian cardinal interpolant `I_h`.
    Interp,
    /// The band-limited quasi-interpolant built from a cutoff.
    Quasi(&'a CutoffSpec),
}

/// Refuses `(n, p, k)` outside the range of the error estimate:
/// `k ≥ n` for `p = 1`, `k > n/p` otherwise.
pub fn check_hypothesis(dim: usize, p: PNorm, k: usize) -> Result<()> {
    let ok = match p {
        PNorm::Finite(q) if q == 1.0 => k >= dim,
        other => k as f64 > dim as f64 * other.recip(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "the error estimate requires k > n/p (k ≥ n when p = 1); got n = {dim}, p = {p}, k = {k}"
        )))
    }
}

fn check_h_list(h_list: &[f64], min_len: usize) -> Result<()> {
    if h_list.len() < min_len {
        return Err(Error::Parameter(format!("need at least {min_len} values of h, got {}", h_list.len())));
    }
    if h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter(format!("h values must be positive and strictly decreasing: {h_list:?}")));
    }
    Ok(())
}

/// Error and target norm at one `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub h: f64,
    pub error: f64,
    pub sobolev_norm: f64,
}

/// Per-axis samples `g^{(r)}` on the fine torus grid.
fn axis_samples(target: &TargetFunction, r: usize, grid_len: usize, origin: f64, spacing: f64) -> Vec<f64> {
    (0..grid_len).map(|i| target.axis_derivative(r, origin + spacing * i as f64)).collect()
}

/// `‖f‖_p + |f|_{W_p^k}` for a tensor-product target, from its per-axis
/// factors on the fine grid; the Riemann norm of a tensor product factorises.
fn target_norm(target: &TargetFunction, k: usize, p: PNorm, values: &GridValues) -> f64 {
    let n = values.points_per_axis;
    let per_axis: Vec<f64> = (0..=k)
        .map(|r| lp_norm(&axis_samples(target, r, n, values.origin, values.spacing), p, values.spacing, 1))
        .collect();
    let dim = values.dim as i32;
    let base = per_axis[0].powi(dim);
    if k == 0 {
        return base;
    }
    let semi = crate::norms::multi_indices(values.dim, k)
        .iter()
        .map(|alpha| alpha.iter().map(|&a| per_axis[a]).product::<f64>())
        .fold(0.0, f64::max);
    base + semi
}

/// `A f` on the fine torus for one `h`.
fn synthesize(target: &TargetFunction, op: Operator<'_>, h: f64, config: &SweepConfig) -> Result<Synthesis> {
    let n = (config.box_radius / h).ceil() as usize;
    if target.support > h * (n as f64 - 1.0) {
        return Err(Error::Parameter(format!(
            "target {} (support radius {}) does not fit in the data box of radius {}",
            target.id, target.support, config.box_radius
        )));
    }
    let grid = GridSpec::new(h, target.dim, 8, 4.0 * h)?;
    let field = SampledField::from_fn(grid, n, true, |x| target.eval(x))?;
    match op {
        Operator::Interp => {
            let ctx = MultiplierContext::new(h, target.dim)?;
            let opts = SpectralOptions {
                fine_factor: config.fine_factor,
                beta_radius: ((config.fine_factor - 1) / 2).max(1),
                padding: Padding::Points(config.padding),
            };
            Ok(interpolate_grid_spectral(&field, &ctx, &opts)?.synthesis)
        }
        Operator::Quasi(spec) => {
            let p = torus_length(n, config.padding);
            quasi_synthesis(&field.values, h, p, config.fine_factor, spec)
        }
    }
}

/// `‖f − A f‖_p` and `‖f‖_{W_p^k}` at one `h`.
pub fn measure_level(target: &TargetFunction, op: Operator<'_>, h: f64, p: PNorm, k: usize, config: &SweepConfig) -> Result<Level> {
    let syn = synthesize(target, op, h, config)?;
    let mut values = syn.values();
    let n = values.points_per_axis;
    let axis = axis_samples(target, 0, n, values.origin, values.spacing);
    let mut idx = vec![0usize; values.dim];
    for (flat, v) in values.data.iter_mut().enumerate() {
        crate::fft::unflatten(flat, n, &mut idx);
        let f: f64 = idx.iter().map(|&i| axis[i]).product();
        *v = f - *v;
    }
    let error = lp_norm(&values.data, p, values.spacing, values.dim);
    let sobolev_norm = target_norm(target, k, p, &values);
    Ok(Level { h, error, sobolev_norm })
}

/// Measures every level and fits the order on the finest `config.fit_levels`.
pub fn run_sweep(
    target: &TargetFunction,
    op: Operator<'_>,
    h_list: &[f64],
    p: PNorm,
    k: usize,
    config: &SweepConfig,
) -> Result<ErrorReport> {
    config.validate()?;
    check_h_list(h_list, 3)?;
    check_hypothesis(target.dim, p, k)?;
    if !target.certifies(k) {
        return Err(Error::Hypothesis(format!(
            "target {} is only certified in W_p^{} but k = {k} was requested",
            target.id,
            target.sobolev_k.unwrap_or(0)
        )));
    }
    let kind = match op {
        Operator::Interp => "convergence",
        Operator::Quasi(_) => "quasi",
    };
    let mut report = ErrorReport::new(kind, &target.id, target.dim, p, k);
    report.config = config.echo();
    report.config.insert("target".into(), target.id.clone());
    report.config.insert("h_list".into(), h_list.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","));
    if let Operator::Quasi(spec) = op {
        report.config.insert("eps".into(), spec.eps.to_string());
        report.config.insert("declared_band".into(), spec.declared_band.to_string());
    }
    report.seed = config.seed;
    for &h in h_list {
        let level = measure_level(target, op, h, p, k, config)?;
        let scale = h.powi(k as i32) * level.sobolev_norm;
        let ratio = if scale > 0.0 { level.error / scale } else { 0.0 };
        report.rows.push(ErrorRow { h, error: level.error, sobolev_norm: level.sobolev_norm, ratio });
    }
    let hs: Vec<f64> = report.rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = report.rows.iter().map(|r| r.error).collect();
    if errs.iter().all(|&e| e == 0.0) {
        report.degenerate = true;
        report.notes.push("all errors are zero; no order can be fitted".into());
    } else if errs.iter().any(|&e| e == 0.0) {
        report.notes.push("some errors are exactly zero; order not fitted".into());
    } else {
        report.fitted_order = Some(convergence_order(&hs, &errs, config.fit_levels)?);
    }
    if let PNorm::Finite(q) = p {
        if q == 1.0 && k == target.dim {
            report.notes.push("k = n with p = 1 lies on the boundary of the hypothesis".into());
        }
    }
    Ok(report)
}

/// The interpolation sweep: `h_list` must be dyadic with at least four levels.
pub fn run_convergence(
    target: &TargetFunction,
    p: PNorm,
    k: usize,
    h_list: &[f64],
    config: &SweepConfig,
) -> Result<ErrorReport> {
    check_h_list(h_list, 4)?;
    if h_list.windows(2).any(|w| (w[1] / w[0] - 0.5).abs() > 1e-12) {
        return Err(Error::Parameter(format!("h values must halve at each level: {h_list:?}")));
    }
    check_hypothesis(target.dim, p, k)?;
    run_sweep(target, Operator::Interp, h_list, p, k, config)
}

/// Result of the log-factor probe.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFactorReport {
    pub report: ErrorReport,
    /// Ratio against `1 + |ln h|` over every level.
    pub fit: LineFit,
    /// `fit.slope` divided by the mean ratio.
    pub relative_slope: f64,
    pub envelope: EnvelopeCheck,
}

/// Held-out finest levels in the envelope check.
pub const LOGFACTOR_HOLDOUT: usize = 2;
/// Relative slack allowed above the envelope.
pub const LOGFACTOR_SLACK: f64 = 0.1;

/// Normalised ratios `‖f − I_h f‖_p / (h^k ‖f‖_{W_p^k})` against `1 + |ln h|`.
/// `p = 2` is accepted as a control.
pub fn run_logfactor_probe(
    target: &TargetFunction,
    p: PNorm,
    k: usize,
    h_list: &[f64],
    config: &SweepConfig,
) -> Result<LogFactorReport> {
    if target.dim != 1 {
        return Err(Error::Parameter("the log-factor probe is one-dimensional".into()));
    }
    if !matches!(p, PNorm::Inf) && p != PNorm::Finite(1.0) && p != PNorm::Finite(2.0) {
        return Err(Error::Parameter(format!("the log-factor probe takes p = 1, inf (or 2 as a control), got {p}")));
    }
    let mut report = run_sweep(target, Operator::Interp, h_list, p, k, config)?;
    report.kind = "logfactor".into();
    let x: Vec<f64> = report.rows.iter().map(|r| 1.0 + r.h.ln().abs()).collect();
    let y: Vec<f64> = report.rows.iter().map(|r| r.ratio).collect();
    let fit = fit_line(&x, &y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let relative_slope = if mean > 0.0 { fit.slope / mean } else { 0.0 };
    let holdout = LOGFACTOR_HOLDOUT.min(y.len().saturating_sub(2));
    let envelope = affine_envelope(&x, &y, holdout, LOGFACTOR_SLACK)?;
    report.summary.insert("log_slope".into(), fit.slope);
    report.summary.insert("log_slope_relative".into(), relative_slope);
    report.summary.insert("log_r_squared".into(), fit.r_squared);
    report.summary.insert("envelope_intercept".into(), envelope.intercept);
    report.summary.insert("envelope_slope".into(), envelope.slope);
    report.summary.insert("envelope_max_excess".into(), envelope.max_excess);
    report.summary.insert("envelope_holds".into(), if envelope.holds { 1.0 } else { 0.0 });
    Ok(LogFactorReport { report, fit, relative_slope, envelope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_gate() {
        assert!(check_hypothesis(1, PNorm::Finite(2.0), 1).is_ok());
        assert!(check_hypothesis(2, PNorm::Finite(2.0), 1).is_err());
        assert!(check_hypothesis(1, PNorm::Finite(1.0), 1).is_ok());
        assert!(check_hypothesis(2, PNorm::Finite(1.0), 1).is_err());
        assert!(check_hypothesis(3, PNorm::Inf, 1).is_ok());
        assert!(check_hypothesis(1, PNorm::Inf, 0).is_err());
        assert_eq!(check_hypothesis(2, PNorm::Finite(4.0), 0).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn zero_target_is_degenerate() {
        let cfg = SweepConfig { box_radius: 4.0, ..Default::default() };
        let r = run_convergence(&TargetFunction::zero(1), PNorm::Finite(2.0), 3, &[0.5, 0.25, 0.125, 0.0625], &cfg).unwrap();
        assert!(r.degenerate && r.fitted_order.is_none());
        assert!(r.rows.iter().all(|row| row.error == 0.0));
    }

    #[test]
    fn input_validation() {
        let cfg = SweepConfig { box_radius: 4.0, ..Default::default() };
        let t = TargetFunction::bspline(3, 1).unwrap();
        assert!(run_convergence(&t, PNorm::Finite(2.0), 3, &[0.5, 0.25, 0.125], &cfg).is_err());
        assert!(run_convergence(&t, PNorm::Finite(2.0), 3, &[0.5, 0.3, 0.125, 0.0625], &cfg).is_err());
        assert_eq!(
            run_convergence(&t, PNorm::Finite(2.0), 4, &[0.5, 0.25, 0.125, 0.0625], &cfg).unwrap_err().exit_code(),
            2
        );
        assert!(run_logfactor_probe(&t, PNorm::Inf, 3, &[0.5], &cfg).is_err());
    }

    #[test]
    fn cubic_bspline_rate() {
        let cfg = SweepConfig { box_radius: 6.0, ..Default::default() };
        let t = TargetFunction::bspline(3, 1).unwrap();
        let r = run_convergence(&t, PNorm::Finite(2.0), 3, &[0.5, 0.25, 0.125, 0.0625], &cfg).unwrap();
        let order = r.fitted_order.unwrap();
        assert!(order > 2.7, "order {order}, rows {:?}", r.rows);
    }
}
