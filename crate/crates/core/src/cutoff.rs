//! A smooth frequency cutoff `ρ̂` and its inverse transform `φ`.
//!
//! `φ̂(ξ) = S((π + ε − |ξ|)/(2ε))`, where `S` is the normalised integral of the
//! bump `exp(−1/(1 − t²))` rescaled to `[0, 1]`. So `φ̂ ≡ 1` on
//! `|ξ| ≤ π − ε` and vanishes for `|ξ| ≥ π + ε`. Since `S(u) + S(1 − u) = 1`,
//! the periodisation `Σ_j φ̂(ξ − 2πj)` is already 1. `ρ̂` divides by it anyway,
//! so the partition identity holds to rounding on any grid, and `φ = ρ̂^∨`
//! satisfies `φ(j) = δ_{j0}` on the integers.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fast_len, fft_cube, signed_index, wrap_index};
use crate::quad::GaussLegendre;
use crate::table::{UniformTable, STENCIL};

/// Default tail cap for truncating `φ` sums.
pub const DEFAULT_DECAY_CAP: f64 = 1e-12;
/// Largest `R_φ` the radius scan will consider.
pub const DEFAULT_MAX_RADIUS: f64 = 4096.0;
/// Spacing of the tabulated `φ`.
pub const PHI_SPACING: f64 = 1.0 / 32.0;
/// Number of frequency samples kept in `CutoffSpec::freq_grid`.
const FREQ_SAMPLES: usize = 4097;

fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (4.0 * s * (1.0 - s))).exp()
    }
}

fn rule() -> &'static (GaussLegendre, f64) {
    static RULE: OnceLock<(GaussLegendre, f64)> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(64);
        let half = gl.integrate(0.0, 0.5, bump);
        (gl, 2.0 * half)
    })
}

/// `S(u) = ∫_0^u bump / ∫_0^1 bump`, clamped to `[0, 1]`, with `S(u) + S(1 − u) = 1` exactly.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if u > 0.5 {
        return 1.0 - smooth_step(1.0 - u);
    }
    let (gl, total) = rule();
    gl.integrate(0.0, u, bump) / total
}

/// The unnormalised cutoff `φ̂`.
pub fn phi_hat(eps: f64, xi: f64) -> f64 {
    smooth_step((PI + eps - xi.abs()) / (2.0 * eps))
}

/// Cutoff data for one `ε`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub eps: f64,
    /// `ρ̂` vanishes for `|ξ| ≥ support = π + ε`.
    pub support: f64,
    /// The declared band `π + 2ε`, which contains the support.
    pub declared_band: f64,
    /// Uniform samples of `ρ̂` on `[−π − 2ε, π + 2ε]`.
    pub freq_grid: Vec<(f64, f64)>,
    /// `φ` on `[−R_φ − margin, R_φ + margin]`.
    pub phi_table: UniformTable,
    /// `|φ(t)| ≤ decay_cap` was observed for `R_φ ≤ |t|` up to the scan limit.
    pub phi_radius: f64,
    pub decay_cap: f64,
    /// Largest `|φ|` seen beyond `R_φ` during the scan.
    pub tail_max: f64,
}

/// `ρ̂(ξ) = φ̂(ξ) / Σ_j φ̂(ξ − 2πj)`.
pub fn rho_hat(eps: f64, xi: f64) -> f64 {
    let x = xi.abs();
    let num = phi_hat(eps, x);
    if num == 0.0 {
        return 0.0;
    }
    // With ε < π/2 only the neighbouring shifts overlap the support.
    let den = phi_hat(eps, x - 2.0 * PI) + num + phi_hat(eps, x + 2.0 * PI);
    num / den
}

/// `φ(nΔt)` for `|n| ≤ n_keep` by an inverse DFT of `ρ̂` with period `T = PΔt`.
/// `ρ̂` is supported inside the DFT band, so the result is the exact
/// `T`-periodisation of `φ`.
fn phi_samples(eps: f64, dt: f64, p: usize, n_keep: usize) -> Vec<f64> {
    let dxi = 2.0 * PI / (p as f64 * dt);
    let mut data: Vec<Complex64> =
        (0..p).map(|q| Complex64::new(rho_hat(eps, signed_index(q, p) as f64 * dxi), 0.0)).collect();
    fft_cube(&mut data, p, 1, true);
    let scale = 1.0 / (p as f64 * dt);
    (-(n_keep as i64)..=n_keep as i64).map(|n| data[wrap_index(n, p)].re * scale).collect()
}

pub fn build_cutoff(eps: f64) -> Result<CutoffSpec> {
    build_cutoff_with(eps, DEFAULT_DECAY_CAP, DEFAULT_MAX_RADIUS)
}

/// Builds the cutoff and picks `R_φ` as the smallest radius beyond which
/// `|φ| ≤ decay_cap`, scanning up to `max_radius`.
pub fn build_cutoff_with(eps: f64, decay_cap: f64, max_radius: f64) -> Result<CutoffSpec> {
    if !(eps > 0.0 && eps < PI / 2.0) {
        return Err(Error::Parameter(format!("eps must lie in (0, π/2), got {eps}")));
    }
    if !(decay_cap > 0.0) || !(max_radius >= 8.0) {
        return Err(Error::Parameter(format!("invalid decay cap {decay_cap} or radius limit {max_radius}")));
    }
    // Coarse scan on a period four times the radius limit, so wrap-around
    // images sit at least 3·max_radius away.
    let scan_dt = 0.25;
    let scan_len = fast_len((4.0 * max_radius / scan_dt).ceil() as usize);
    let scan_keep = (max_radius / scan_dt).ceil() as usize;
    let scan = phi_samples(eps, scan_dt, scan_len, scan_keep);
    let centre = scan_keep;
    let last_big = (0..=scan_keep)
        .rev()
        .find(|&i| scan[centre + i].abs() > decay_cap || scan[centre - i].abs() > decay_cap)
        .unwrap_or(0);
    let phi_radius = (((last_big + 1) as f64 * scan_dt).ceil()).clamp(8.0, max_radius);
    let tail_max = (0..=scan_keep)
        .filter(|&i| i as f64 * scan_dt >= phi_radius)
        .map(|i| scan[centre + i].abs().max(scan[centre - i].abs()))
        .fold(0.0, f64::max);
    // Fine table: integer period (so φ(j) = δ exactly) at least 4R_φ.
    let per_unit = (1.0 / PHI_SPACING).round() as usize;
    let period = fast_len((4.0 * phi_radius).ceil() as usize);
    let keep = ((phi_radius + STENCIL as f64 * PHI_SPACING) / PHI_SPACING).ceil() as usize;
    let values = phi_samples(eps, PHI_SPACING, period * per_unit, keep);
    let phi_table = UniformTable::new(-(keep as f64) * PHI_SPACING, PHI_SPACING, values);
    let lo = -PI - 2.0 * eps;
    let step = 2.0 * (PI + 2.0 * eps) / (FREQ_SAMPLES - 1) as f64;
    let freq_grid = (0..FREQ_SAMPLES)
        .map(|i| {
            let xi = lo + step * i as f64;
            (xi, rho_hat(eps, xi))
        })
        .collect();
    Ok(CutoffSpec {
        eps,
        support: PI + eps,
        declared_band: PI + 2.0 * eps,
        freq_grid,
        phi_table,
        phi_radius,
        decay_cap: decay_cap.max(tail_max),
        tail_max,
    })
}

impl CutoffSpec {
    pub fn rho_hat(&self, xi: f64) -> f64 {
        rho_hat(self.eps, xi)
    }

    /// `φ(t)`; zero for `|t| > R_φ`, where `|φ| ≤ decay_cap`.
    pub fn phi_eval(&self, t: f64) -> f64 {
        if t.abs() > self.phi_radius {
            0.0
        } else {
            self.phi_table.eval(t)
        }
    }

    /// Note attached to evaluations beyond `R_φ`.
    pub fn tail_note(&self) -> String {
        format!("|φ(t)| ≤ {:.1e} for |t| > R_φ = {}; value returned as 0", self.decay_cap, self.phi_radius)
    }

    /// `max |Σ_{|j|≤2} ρ̂(ξ − 2πj) − 1|` over the stored frequency grid.
    pub fn partition_defect(&self) -> f64 {
        self.freq_grid
            .iter()
            .map(|&(xi, _)| {
                let s: f64 = (-2..=2).map(|j| self.rho_hat(xi - 2.0 * PI * j as f64)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
