//! The Lagrange function `χ_h(x) = Σ_j b_j e^{-|x - hj|²}` of Gaussian
//! cardinal interpolation on `hℤⁿ`.
//!
//! Two independent constructions are provided. [`coefficients_dense`] solves
//! the truncated collocation system directly and is only practical at desk
//! scale. [`coefficients_spectral`] takes the `b_j` as Fourier coefficients of
//! the reciprocal of the Gaussian symbol `σ(ω) = Σ_k e^{-h²|k|²} e^{-i⟨k,ω⟩}`,
//! and [`chi_table`] samples `χ_h` itself as the inverse transform of
//! `h^n m_h^{[n]}`, which stays well conditioned as `h → 0`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fast_len, fft_cube, signed_index, unflatten, wrap_index};
use crate::lattice::{GridValues, LatticeArray};
use crate::multiplier::MultiplierContext;
use crate::table::{UniformTable, STENCIL};

/// Largest collocation system the dense route will assemble.
pub const DENSE_SIZE_CAP: usize = 10_000;
/// Coefficients below this magnitude are skipped in evaluation sums.
pub const COEFF_TAIL_CUT: f64 = 1e-14;
/// Beyond this distance the Gaussian factor is below `e^{-42}`.
const GAUSS_REACH: f64 = 6.5;
const LN_INV_TOL: f64 = 39.143_946_580_898_86; // ln(1e17)

/// The lattice `hℤⁿ` with coefficient and evaluation truncation radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    pub dim: usize,
    /// Coefficients are kept for `‖j‖_∞ ≤ coeff_radius`.
    pub coeff_radius: usize,
    /// `χ_h` is tabulated on `[-eval_radius, eval_radius]ⁿ`.
    pub eval_radius: f64,
}

impl GridSpec {
    pub fn new(h: f64, dim: usize, coeff_radius: usize, eval_radius: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {h}")));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if coeff_radius < 8 {
            return Err(Error::Parameter(format!("coefficient radius must be at least 8, got {coeff_radius}")));
        }
        if !(eval_radius >= 4.0 * h) {
            return Err(Error::Parameter(format!(
                "evaluation radius {eval_radius} must be at least 4h = {}",
                4.0 * h
            )));
        }
        Ok(Self { h, dim, coeff_radius, eval_radius })
    }

    /// Radius 32 in one dimension and 16 per axis otherwise; the evaluation
    /// radius covers half the coefficient box.
    pub fn with_defaults(h: f64, dim: usize) -> Result<Self> {
        let n = if dim == 1 { 32 } else { 16 };
        Self::new(h, dim, n, (0.5 * n as f64 * h).max(4.0 * h))
    }
}

/// Coefficients `b_j` and fine-grid samples of `χ_h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangeTable {
    pub grid: GridSpec,
    /// Built on first use; unavailable once `σ` underflows (small `h`).
    #[serde(skip)]
    coeffs: OnceLock<LatticeArray>,
    pub fine_factor: usize,
    /// Ratio between `h/M` and the spacing of `line`.
    pub refine: usize,
    /// One-dimensional `χ_h` on a grid of spacing `h/(M·refine)` covering `[-R, R]`.
    pub line: UniformTable,
}

/// `σ(ω) = Σ_k e^{-h²k²} cos(kω)`, the symbol of the one-dimensional
/// collocation matrix. For `h < 1` the Poisson-dual form
/// `(√π/h) Σ_l e^{-(ω - 2πl)²/(4h²)}` is used: it has no cancellation near
/// `ω = π`, where `σ` becomes tiny.
pub fn symbol(h: f64, omega: f64) -> f64 {
    if h >= 1.0 {
        let kmax = ((LN_INV_TOL.sqrt() / h).ceil() as i64).max(2);
        let mut s = 1.0;
        for k in 1..=kmax {
            let k = k as f64;
            s += 2.0 * (-(h * h) * k * k).exp() * (k * omega).cos();
        }
        s
    } else {
        let w = omega - 2.0 * PI * (omega / (2.0 * PI)).round();
        let lmax = ((2.0 * h * LN_INV_TOL.sqrt()) / (2.0 * PI)).ceil() as i64 + 1;
        let mut s = 0.0;
        for l in -lmax..=lmax {
            let d = w - 2.0 * PI * l as f64;
            s += (-(d * d) / (4.0 * h * h)).exp();
        }
        s * PI.sqrt() / h
    }
}

/// Solves `Σ_j b_j e^{-h²|i-j|²} = δ_{i0}` for `‖i‖_∞, ‖j‖_∞ ≤ N` by Cholesky.
pub fn coefficients_dense(grid: &GridSpec) -> Result<LatticeArray> {
    let side = 2 * grid.coeff_radius + 1;
    let size = side
        .checked_pow(grid.dim as u32)
        .filter(|&s| s <= DENSE_SIZE_CAP)
        .ok_or_else(|| {
            Error::Parameter(format!(
                "dense collocation system of side {side} in dimension {} exceeds {DENSE_SIZE_CAP} unknowns; \
                 use coefficients_spectral instead",
                grid.dim
            ))
        })?;
    let layout = LatticeArray::zeros(grid.dim, grid.coeff_radius);
    let h2 = grid.h * grid.h;
    let mut ii = vec![0i64; grid.dim];
    let mut jj = vec![0i64; grid.dim];
    let a = DMatrix::from_fn(size, size, |r, c| {
        layout.unflatten_into(r, &mut ii);
        layout.unflatten_into(c, &mut jj);
        let d2: i64 = ii.iter().zip(&jj).map(|(x, y)| (x - y) * (x - y)).sum();
        (-h2 * d2 as f64).exp()
    });
    let mut rhs = DVector::zeros(size);
    let centre = layout.flat_index(&vec![0; grid.dim]).expect("origin is inside the box");
    rhs[centre] = 1.0;
    let chol = a.cholesky().ok_or_else(|| {
        Error::Internal(format!(
            "Gaussian collocation matrix at h = {} is numerically singular in double precision",
            grid.h
        ))
    })?;
    let b = chol.solve(&rhs);
    LatticeArray::from_vec(grid.dim, grid.coeff_radius, b.iter().copied().collect())
}

fn spectral_points(grid: &GridSpec) -> usize {
    let decay_budget = (45.0 / (grid.h * grid.h)).ceil() as usize;
    fast_len((4 * (grid.coeff_radius + 1)).max(grid.coeff_radius + decay_budget).max(64))
}

/// `b_j = (2π)^{-n} ∫_{[-π,π]ⁿ} e^{i⟨j,ω⟩} / σ(ω) dω` by the trapezoid rule
/// on a uniform periodic grid, evaluated with an inverse DFT.
pub fn coefficients_spectral(grid: &GridSpec) -> Result<LatticeArray> {
    let p = spectral_points(grid);
    let dim = grid.dim;
    let total = p
        .checked_pow(dim as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| Error::Parameter(format!("spectral grid {p}^{dim} is too large")))?;
    let inv_symbol: Vec<f64> = (0..p)
        .map(|q| {
            let s = symbol(grid.h, 2.0 * PI * q as f64 / p as f64);
            if s > 0.0 && s.is_finite() {
                Ok(1.0 / s)
            } else {
                Err(Error::Internal(format!("symbol evaluated to {s} at bin {q}; it must be positive")))
            }
        })
        .collect::<Result<_>>()?;
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; dim];
    for (flat, slot) in data.iter_mut().enumerate() {
        unflatten(flat, p, &mut idx);
        *slot = Complex64::new(idx.iter().map(|&q| inv_symbol[q]).product(), 0.0);
    }
    fft_cube(&mut data, p, dim, true);
    let scale = 1.0 / total as f64;
    Ok(LatticeArray::from_fn(dim, grid.coeff_radius, |j| {
        let flat = j.iter().fold(0usize, |acc, &c| acc * p + wrap_index(c, p));
        data[flat].re * scale
    }))
}

/// Coefficients of the cardinal function `L_λ(y) = Σ_j c_j e^{-λ|y - j|²}` on
/// `ℤ`, computed from the λ-parameterised symbol summed directly.
pub fn cardinal_coefficients(lambda: f64, radius: usize) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    let kmax = ((LN_INV_TOL / lambda).sqrt().ceil() as i64).max(2);
    let p = fast_len((radius + (45.0 / lambda).ceil() as usize).max(4 * (radius + 1)).max(64));
    let mut data: Vec<Complex64> = (0..p)
        .map(|q| {
            let w = 2.0 * PI * q as f64 / p as f64;
            let s: f64 = (-kmax..=kmax).map(|k| (-lambda * (k * k) as f64).exp() * (k as f64 * w).cos()).sum();
            Complex64::new(1.0 / s, 0.0)
        })
        .collect();
    fft_cube(&mut data, p, 1, true);
    Ok((-(radius as i64)..=radius as i64).map(|j| data[wrap_index(j, p)].re / p as f64).collect())
}

/// `L_λ(y)` from coefficients indexed `-radius..=radius`.
pub fn cardinal_eval(lambda: f64, coeffs: &[f64], y: f64) -> f64 {
    let radius = (coeffs.len() / 2) as i64;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = y - (i as i64 - radius) as f64;
            c * (-lambda * d * d).exp()
        })
        .sum()
}

/// Finest spacing used for the internal one-dimensional profile of `χ_h`.
pub const LINE_SPACING_MAX: f64 = 1.0 / 32.0;

/// One-dimensional `χ_h` on `(h/M')ℤ ∩ [-R', R']`, where `M'` is a multiple of
/// `M` fine enough for local interpolation and `R'` leaves room for a stencil.
fn chi_line(h: f64, radius: f64, fine_factor: usize) -> Result<(UniformTable, usize)> {
    let ctx = MultiplierContext::new(h, 1)?;
    let k = ctx.series_radius();
    // The DFT band 2π/Δx must cover |ξ| ≤ 2π(K+1)/h, and Δx must resolve the
    // highest frequency carried by m_h for stencil interpolation.
    let need = ((2 * (k + 1)) as f64).max(h / LINE_SPACING_MAX).ceil() as usize;
    let refine = need.div_ceil(fine_factor).max(1);
    let m_eff = fine_factor * refine;
    let dx = h / m_eff as f64;
    let reach = radius + (STENCIL as f64) * dx;
    // Periodisation in x: χ_h decays like e^{-h|x|}·h/(π|x|).
    let tail = 30.0 / h + 8.0 * h;
    let period_min = (2.0 * (reach + 4.0 * h)).max(2.0 * reach + 2.0 * tail);
    let coarse = fast_len((period_min / h).ceil() as usize);
    let p = coarse * m_eff;
    let dxi = 2.0 * PI / (p as f64 * dx);
    if dxi > PI / (radius + 4.0 * h) {
        return Err(Error::Parameter(format!("frequency spacing {dxi} is too coarse for evaluation radius {radius}")));
    }
    let band_edge = (p / 2) as f64 * dxi;
    if ctx.log_m(band_edge)? > (1e-17f64).ln() {
        return Err(Error::Accuracy(format!("multiplier has not decayed at the band edge {band_edge}")));
    }
    let mut data: Vec<Complex64> = (0..p)
        .map(|q| {
            let xi = signed_index(q, p) as f64 * dxi;
            Ok(Complex64::new(h * ctx.m(xi)?, 0.0))
        })
        .collect::<Result<_>>()?;
    fft_cube(&mut data, p, 1, true);
    // (1/2π)Σ F(ξ_q) e^{ixξ_q} Δξ with Δξ/(2π) = 1/(pΔx).
    let scale = 1.0 / (p as f64 * dx);
    let n_half = (reach / dx).ceil() as i64;
    let values = (-n_half..=n_half).map(|i| data[wrap_index(i, p)].re * scale).collect();
    Ok((UniformTable::new(-(n_half as f64) * dx, dx, values), refine))
}

/// Tabulates `χ_h = (h^n m_h^{[n]})^∨` around `[-R, R]ⁿ` and attaches the
/// spectral coefficients.
///
/// The frequency band is a whole number of periods `2π/h` and the spatial
/// period a whole number of lattice steps, so the sampled values at lattice
/// nodes inherit the partition identity `Σ_k m_h(ξ - 2πk/h) = 1` exactly.
/// `χ_h^{[n]}` is the tensor product of the one-dimensional profile.
pub fn chi_table(grid: &GridSpec, fine_factor: usize) -> Result<LagrangeTable> {
    if fine_factor < 2 {
        return Err(Error::Parameter(format!("fine factor must be at least 2, got {fine_factor}")));
    }
    let (line, refine) = chi_line(grid.h, grid.eval_radius, fine_factor)?;
    Ok(LagrangeTable { grid: *grid, coeffs: OnceLock::new(), fine_factor, refine, line })
}

impl LagrangeTable {
    /// `χ_h(x)` by local interpolation of the tabulated profile.
    pub fn chi_eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.grid.dim {
            return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), self.grid.dim)));
        }
        let limit = self.grid.eval_radius - self.grid.h;
        if x.iter().any(|c| !c.is_finite() || c.abs() > limit + 1e-12) {
            return Err(Error::Extrapolation(format!("point {x:?} lies outside ‖x‖_∞ ≤ R − h = {limit}")));
        }
        Ok(x.iter().map(|&c| self.line.eval(c)).product())
    }

    /// One-dimensional `χ_h(t)` for `|t| ≤ R`, zero beyond; the dropped tail is
    /// below `e^{-h(R-h)}`.
    pub fn chi_1d(&self, t: f64) -> f64 {
        if t.abs() > self.grid.eval_radius {
            0.0
        } else {
            self.line.eval(t)
        }
    }

    /// The truncated Gaussian expansion `Σ_{‖j‖_∞ ≤ N} b_j e^{-|x - hj|²}`.
    /// Only trustworthy for `h` near 1, since `|b_j|` grows like `e^{π²/(4h²)}`.
    pub fn chi_expansion(&self, x: &[f64]) -> Result<f64> {
        chi_from_coeffs(&self.grid, self.coeffs()?, x)
    }

    /// The expansion coefficients `b_j` for `‖j‖_∞ ≤ N`.
    pub fn coeffs(&self) -> Result<&LatticeArray> {
        if let Some(c) = self.coeffs.get() {
            return Ok(c);
        }
        let c = coefficients_spectral(&self.grid)?;
        Ok(self.coeffs.get_or_init(|| c))
    }

    /// The one-dimensional profile on `(h/M)ℤ ∩ [-R, R]`.
    pub fn line_samples(&self) -> GridValues {
        let spacing = self.grid.h / self.fine_factor as f64;
        let n_half = (self.grid.eval_radius / spacing + 1e-9).floor() as i64;
        let data = (-n_half..=n_half).map(|i| self.line.values[self.line_index(i)]).collect::<Vec<_>>();
        GridValues { dim: 1, points_per_axis: data.len(), spacing, origin: -(n_half as f64) * spacing, data }
    }

    /// Position in `line` of the `(h/M)` grid node with signed index `i`.
    fn line_index(&self, i: i64) -> usize {
        let centre = (-self.line.origin / self.line.spacing).round() as i64;
        (centre + i * self.refine as i64) as usize
    }

    /// `χ_h^{[n]}` on `(h/M)ℤⁿ ∩ [-R, R]ⁿ`, formed from the one-dimensional profile.
    pub fn samples(&self) -> GridValues {
        let line = self.line_samples();
        let n = line.points_per_axis;
        let mut idx = vec![0usize; self.grid.dim];
        let data = (0..n.pow(self.grid.dim as u32))
            .map(|flat| {
                unflatten(flat, n, &mut idx);
                idx.iter().map(|&i| line.data[i]).product()
            })
            .collect();
        GridValues { dim: self.grid.dim, points_per_axis: n, spacing: line.spacing, origin: line.origin, data }
    }

    /// Tabulated value at the `(h/M)` grid node nearest to `x`.
    pub fn sample(&self, x: &[f64]) -> Option<f64> {
        let step = self.grid.h / self.fine_factor as f64;
        let mut v = 1.0;
        for &c in x {
            if c.abs() > self.grid.eval_radius + 1e-12 {
                return None;
            }
            v *= self.line.values[self.line_index((c / step).round() as i64)];
        }
        Some(v)
    }
}

/// Evaluates `Σ_j b_j e^{-|x - hj|²}` for an arbitrary coefficient set.
pub fn chi_from_coeffs(grid: &GridSpec, coeffs: &LatticeArray, x: &[f64]) -> Result<f64> {
    if x.len() != grid.dim {
        return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), grid.dim)));
    }
    let limit = grid.eval_radius - grid.h;
    if x.iter().any(|c| !c.is_finite() || c.abs() > limit + 1e-12) {
        return Err(Error::Extrapolation(format!("point {x:?} lies outside ‖x‖_∞ ≤ R − h = {limit}")));
    }
    let n = coeffs.radius() as i64;
    let h = grid.h;
    // Per-axis index windows and Gaussian factors.
    let mut ranges = Vec::with_capacity(grid.dim);
    let mut factors = Vec::with_capacity(grid.dim);
    for &c in x {
        let lo = (((c - GAUSS_REACH) / h).ceil() as i64).max(-n);
        let hi = (((c + GAUSS_REACH) / h).floor() as i64).min(n);
        if lo > hi {
            return Ok(0.0);
        }
        factors.push((lo..=hi).map(|j| (-(c - h * j as f64).powi(2)).exp()).collect::<Vec<_>>());
        ranges.push((lo, hi));
    }
    let counts: Vec<usize> = ranges.iter().map(|(lo, hi)| (hi - lo + 1) as usize).collect();
    let total: usize = counts.iter().product();
    let mut j = vec![0i64; grid.dim];
    let mut sum = 0.0;
    for flat in 0..total {
        let mut rest = flat;
        let mut weight = 1.0;
        for axis in (0..grid.dim).rev() {
            let off = rest % counts[axis];
            rest /= counts[axis];
            j[axis] = ranges[axis].0 + off as i64;
            weight *= factors[axis][off];
        }
        let b = coeffs.get(&j).unwrap_or(0.0);
        if b.abs() >= COEFF_TAIL_CUT {
            sum += b * weight;
        }
    }
    Ok(sum)
}
