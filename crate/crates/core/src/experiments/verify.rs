//! The invariant suite behind the `verify` subcommand.
//!
//! Every check is deterministic for a given seed, so two runs produce
//! byte-identical reports.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::m_prime_l1;
use crate::cutoff::build_cutoff;
use crate::error::Result;
use crate::interpolator::SampledField;
use crate::lagrange::{chi_table, coefficients_dense, coefficients_spectral, GridSpec};
use crate::multiplier::MultiplierContext;
use crate::norms::PNorm;
use crate::oracles::{oracle_chi, oracle_lagrange_coeffs, oracle_log_m, OracleConfig};
use crate::quasi::quasi_interpolant;

use super::config::SweepConfig;
use super::report::to_csv;
use super::stability::run_stability;
use super::targets::bspline_derivative;

/// One invariant: `value ≤ tolerance` passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub version: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        to_csv(&self.checks)
    }
}

fn check(name: &str, value: f64, tolerance: f64) -> Check {
    Check { name: name.to_string(), value, tolerance, passed: value <= tolerance }
}

/// Runs the invariant suite.
pub fn run_verify(seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = OracleConfig::default();
    let mut checks = Vec::new();
    for (label, h) in [("1", 1.0), ("1/2", 0.5), ("1/4", 0.25)] {
        let ctx = MultiplierContext::new(h, 1)?;
        let mut oracle_dev = 0.0f64;
        let mut partition_dev = 0.0f64;
        for _ in 0..100 {
            let xi = rng.random_range(-8.0 * PI / h..8.0 * PI / h);
            let (log_o, _) = oracle_log_m(h, xi, &oracle)?;
            oracle_dev = oracle_dev.max((ctx.log_m(xi)? - log_o).abs() / log_o.abs().max(1.0));
            partition_dev = partition_dev.max((ctx.alias_sum(xi, ctx.series_radius() + 2)? - 1.0).abs());
        }
        checks.push(check(&format!("multiplier_vs_oracle h={label}"), oracle_dev, 1e-12));
        checks.push(check(&format!("partition_of_unity h={label}"), partition_dev, 1e-10));
        let l1 = m_prime_l1(&ctx)?;
        checks.push(check(&format!("m_prime_l1_equals_2m0 h={label}"), (l1 / (2.0 * ctx.m(0.0)?) - 1.0).abs(), 1e-6));
        let grid = GridSpec::new(h, 1, 32, 16.0 * h + 4.0 * h)?;
        let table = chi_table(&grid, 8)?;
        let mut card = 0.0f64;
        for j in -16i64..=16 {
            let v = table.chi_eval(&[h * j as f64])?;
            card = card.max((v - if j == 0 { 1.0 } else { 0.0 }).abs());
        }
        checks.push(check(&format!("cardinality h={label}"), card, 1e-8));
    }
    let grid = GridSpec::new(1.0, 1, 16, 8.0)?;
    let dense = coefficients_dense(&grid)?;
    let spectral = coefficients_spectral(&grid)?;
    let solve = oracle_lagrange_coeffs(&grid, &oracle)?;
    let interior = |j: i64| j.abs() <= 8;
    let mut d_vs_s = 0.0f64;
    let mut d_vs_o = 0.0f64;
    for (j, v) in dense.iter() {
        if interior(j[0]) {
            d_vs_s = d_vs_s.max((v - spectral.get(&j).unwrap_or(0.0)).abs());
        }
        d_vs_o = d_vs_o.max((v - solve.coeffs.get(&j).unwrap_or(0.0)).abs());
    }
    checks.push(check("dense_vs_spectral_coefficients h=1", d_vs_s, 1e-8));
    checks.push(check("dense_vs_oracle_coefficients h=1", d_vs_o, 1e-10));
    checks.push(check("oracle_solve_residual h=1", *solve.residuals.last().unwrap_or(&f64::INFINITY), 1e-12));
    let table = chi_table(&GridSpec::new(1.0, 1, 32, 12.0)?, 8)?;
    let mut ft_dev = 0.0f64;
    for x in [0.3, 1.7, 5.2] {
        ft_dev = ft_dev.max((table.chi_1d(x) - oracle_chi(1.0, x, &oracle)?).abs());
    }
    checks.push(check("transform_vs_trapezoid_oracle h=1", ft_dev, 1e-9));
    let spec = build_cutoff(1.0)?;
    checks.push(check("cutoff_partition eps=1", spec.partition_defect(), 1e-12));
    let phi_dev = (-20i64..=20)
        .map(|j| (spec.phi_eval(j as f64) - if j == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    checks.push(check("phi_cardinal eps=1", phi_dev, 1e-8));
    let field = SampledField::from_fn(GridSpec::new(0.25, 1, 8, 1.0)?, 16, true, |x| bspline_derivative(3, 0, x[0]))?;
    let g = quasi_interpolant(&field, &spec)?;
    let mut q_dev = 0.0f64;
    for j in -16i64..=16 {
        let x = 0.25 * j as f64;
        q_dev = q_dev.max((g.eval(&[x])? - bspline_derivative(3, 0, x)).abs());
    }
    checks.push(check("quasi_lattice_interpolation h=1/4", q_dev, 1e-8));
    let syn = g.synthesize(8, None)?;
    checks.push(check("quasi_out_of_band h=1/4", syn.out_of_band_fraction(spec.support / 0.25), 1e-10));
    let cfg = SweepConfig { stability_points: 63, seed, ..Default::default() };
    let stab = run_stability(&spec, PNorm::Finite(2.0), 1, &[0.5, 0.25], 4, &cfg)?;
    let q = stab.q_factors.iter().map(|r| r.q_max).fold(0.0, f64::max);
    checks.push(check("stability_q2_seeded", q, 10.0));
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { seed, version: env!("CARGO_PKG_VERSION").to_string(), passed, checks })
}
