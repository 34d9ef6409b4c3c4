//! Lattice expansions `u(x) = Σ_j c_j ψ(x - hj)` synthesised on a periodic
//! fine grid.
//!
//! The data sit on a torus of `P` lattice points per axis. With `M` fine
//! points per lattice step, the fine frequencies are `ξ_s = 2πs/(Ph)` and
//!
//! ```text
//! û(ξ_s) = h^n · C(s mod P) · Π_i ψ̂₁(ξ_{s_i}),
//! ```
//!
//! where `C` is the DFT of the coefficients and the per-axis symbol is
//! normalised so that `ψ̂ = h^n Π_i ψ̂₁`; for the Lagrange function
//! `ψ̂₁ = m_h`, and for `φ(x/h)` it is `ρ̂(hξ)`. The inverse DFT of the fine
//! spectrum divided by `P^n` then gives `u` at the fine nodes exactly for the
//! periodised expansion, up to the frequencies cut off by the fine band.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft_cube, signed_index, unflatten, wrap_index};
use crate::lattice::{GridValues, LatticeArray};

/// Largest fine grid (total points) the synthesis will allocate.
pub const MAX_FINE_POINTS: usize = 1 << 25;

/// Fine-grid spectrum of a lattice expansion on a torus.
#[derive(Debug, Clone)]
pub struct Synthesis {
    dim: usize,
    h: f64,
    coarse_len: usize,
    fine_factor: usize,
    spectrum: Vec<Complex64>,
}

/// Frequency of fine bin `s` on a torus of `coarse_len` lattice steps.
pub fn fine_frequency(s: usize, h: f64, coarse_len: usize, fine_factor: usize) -> f64 {
    2.0 * PI * signed_index(s, coarse_len * fine_factor) as f64 / (coarse_len as f64 * h)
}

/// Index `l` of the period `[(2l-1)π/h, (2l+1)π/h)` that contains `ξ`.
pub fn replica_index(xi: f64, h: f64) -> i64 {
    (xi * h / (2.0 * PI) + 0.5).floor() as i64
}

/// Samples `ψ̂₁(ξ_s)` for every fine bin of one axis.
pub fn symbol_samples(
    h: f64,
    coarse_len: usize,
    fine_factor: usize,
    mut symbol: impl FnMut(f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    (0..coarse_len * fine_factor).map(|s| symbol(fine_frequency(s, h, coarse_len, fine_factor))).collect()
}

impl Synthesis {
    /// `coeffs` is placed on the torus by wrapping its indices, so the torus
    /// must be at least as wide as the coefficient box.
    pub fn new(coeffs: &LatticeArray, h: f64, coarse_len: usize, fine_factor: usize, symbol: &[f64]) -> Result<Self> {
        let dim = coeffs.dim();
        if coarse_len < coeffs.side() {
            return Err(Error::Parameter(format!(
                "torus of {coarse_len} points cannot hold a coefficient box of side {}",
                coeffs.side()
            )));
        }
        if fine_factor == 0 {
            return Err(Error::Parameter("fine factor must be positive".into()));
        }
        let fine_len = coarse_len * fine_factor;
        if symbol.len() != fine_len {
            return Err(Error::Parameter(format!("symbol has {} samples, expected {fine_len}", symbol.len())));
        }
        let fine_total = fine_len
            .checked_pow(dim as u32)
            .filter(|&t| t <= MAX_FINE_POINTS)
            .ok_or_else(|| Error::Parameter(format!("fine grid {fine_len}^{dim} exceeds {MAX_FINE_POINTS} points")))?;
        let mut coarse = vec![Complex64::new(0.0, 0.0); coarse_len.pow(dim as u32)];
        for (j, v) in coeffs.iter() {
            let flat = j.iter().fold(0usize, |acc, &c| acc * coarse_len + wrap_index(c, coarse_len));
            coarse[flat] = Complex64::new(v, 0.0);
        }
        fft_cube(&mut coarse, coarse_len, dim, false);
        let hn = h.powi(dim as i32);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); fine_total];
        let mut idx = vec![0usize; dim];
        for (flat, slot) in spectrum.iter_mut().enumerate() {
            unflatten(flat, fine_len, &mut idx);
            let mut weight = hn;
            let mut cflat = 0usize;
            for &s in &idx {
                weight *= symbol[s];
                cflat = cflat * coarse_len + s % coarse_len;
            }
            if weight != 0.0 {
                *slot = coarse[cflat] * weight;
            }
        }
        Ok(Self { dim, h, coarse_len, fine_factor, spectrum })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_len
    }

    pub fn fine_factor(&self) -> usize {
        self.fine_factor
    }

    pub fn fine_len(&self) -> usize {
        self.coarse_len * self.fine_factor
    }

    pub fn spacing(&self) -> f64 {
        self.h / self.fine_factor as f64
    }

    /// Length of the torus along each axis.
    pub fn period(&self) -> f64 {
        self.coarse_len as f64 * self.h
    }

    fn frequency(&self, s: usize) -> f64 {
        fine_frequency(s, self.h, self.coarse_len, self.fine_factor)
    }

    /// Values on the fine torus grid, centred on the origin.
    pub fn values(&self) -> GridValues {
        self.derivative(&vec![0; self.dim])
    }

    /// `D^α u` on the fine torus grid by spectral differentiation.
    pub fn derivative(&self, alpha: &[usize]) -> GridValues {
        assert_eq!(alpha.len(), self.dim, "multi-index length must match the dimension");
        let n = self.fine_len();
        let mut data = self.spectrum.clone();
        if alpha.iter().any(|&a| a > 0) {
            // Per-axis factors (iξ)^a; the unpaired Nyquist bin is dropped for odd orders.
            let factors: Vec<Vec<Complex64>> = alpha
                .iter()
                .map(|&a| {
                    (0..n)
                        .map(|s| {
                            if a % 2 == 1 && n % 2 == 0 && s == n / 2 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new(0.0, self.frequency(s)).powu(a as u32)
                            }
                        })
                        .collect()
                })
                .collect();
            let mut idx = vec![0usize; self.dim];
            for (flat, v) in data.iter_mut().enumerate() {
                unflatten(flat, n, &mut idx);
                for (axis, &s) in idx.iter().enumerate() {
                    *v *= factors[axis][s];
                }
            }
        }
        fft_cube(&mut data, n, self.dim, true);
        // (2π)^{-n} Σ û(ξ_s) e^{ixξ_s} Δξ^n with Δξ = 2π/(Ph); the h^n cancels the one in û.
        let scale = 1.0 / (self.coarse_len as f64 * self.h).powi(self.dim as i32);
        let half = n / 2;
        let spacing = self.spacing();
        let mut out = Vec::with_capacity(data.len());
        let mut idx = vec![0usize; self.dim];
        for flat in 0..data.len() {
            unflatten(flat, n, &mut idx);
            let src = idx.iter().fold(0usize, |acc, &i| acc * n + wrap_index(i as i64 - half as i64, n));
            out.push(data[src].re * scale);
        }
        GridValues { dim: self.dim, points_per_axis: n, spacing, origin: -(half as f64) * spacing, data: out }
    }

    /// Fraction of the spectral energy at frequencies with some `|ξ_i| > band`.
    pub fn out_of_band_fraction(&self, band: f64) -> f64 {
        let n = self.fine_len();
        let outside: Vec<bool> = (0..n).map(|s| self.frequency(s).abs() > band).collect();
        let mut idx = vec![0usize; self.dim];
        let (mut total, mut out) = (0.0, 0.0);
        for (flat, v) in self.spectrum.iter().enumerate() {
            unflatten(flat, n, &mut idx);
            let e = v.norm_sqr();
            total += e;
            if idx.iter().any(|&s| outside[s]) {
                out += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            out / total
        }
    }
}

/// Restricts a centred grid to the nodes with `‖x‖_∞ ≤ radius`.
pub fn crop_centered(grid: &GridValues, radius: f64) -> GridValues {
    let n = grid.points_per_axis;
    let first = (0..n).find(|&i| grid.coordinate(i) >= -radius - 1e-9 * grid.spacing).unwrap_or(n);
    let last = (0..n).rev().find(|&i| grid.coordinate(i) <= radius + 1e-9 * grid.spacing).unwrap_or(0);
    if first > last {
        return GridValues { dim: grid.dim, points_per_axis: 0, spacing: grid.spacing, origin: 0.0, data: vec![] };
    }
    let m = last - first + 1;
    let mut idx = vec![0usize; grid.dim];
    let mut src = vec![0usize; grid.dim];
    let data = (0..m.pow(grid.dim as u32))
        .map(|flat| {
            unflatten(flat, m, &mut idx);
            for (s, &i) in src.iter_mut().zip(&idx) {
                *s = i + first;
            }
            grid.value_at_nodes(&src)
        })
        .collect();
    GridValues { dim: grid.dim, points_per_axis: m, spacing: grid.spacing, origin: grid.coordinate(first), data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_symbol_reproduces_a_gaussian_sum() {
        // ψ = e^{-x²}, ψ̂ = √π e^{-ξ²/4} = h·ψ̂₁; u = Σ c_j ψ(x - hj) directly.
        let h = 0.5;
        let c = LatticeArray::from_fn(1, 6, |j| ((j[0] as f64) * 0.7).cos());
        let (p, m) = (64, 4);
        let sym = symbol_samples(h, p, m, |xi| Ok(PI.sqrt() * (-xi * xi / 4.0).exp() / h)).unwrap();
        let s = Synthesis::new(&c, h, p, m, &sym).unwrap();
        let v = s.values();
        let d = s.derivative(&[1]);
        for i in (0..v.points_per_axis).step_by(5) {
            let x = v.coordinate(i);
            let direct: f64 = c.iter().map(|(j, cj)| cj * (-(x - h * j[0] as f64).powi(2)).exp()).sum();
            let slope: f64 =
                c.iter().map(|(j, cj)| cj * -2.0 * (x - h * j[0] as f64) * (-(x - h * j[0] as f64).powi(2)).exp()).sum();
            assert!((v.data[i] - direct).abs() < 1e-12, "x={x}");
            assert!((d.data[i] - slope).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn tensor_symbol_in_two_dimensions() {
        let h = 1.0;
        let c = LatticeArray::from_fn(2, 2, |j| if j == [0, 0] { 1.0 } else if j == [1, -1] { -0.5 } else { 0.0 });
        let sym = symbol_samples(h, 16, 4, |xi| Ok(PI.sqrt() * (-xi * xi / 4.0).exp())).unwrap();
        let v = Synthesis::new(&c, h, 16, 4, &sym).unwrap().values();
        for flat in (0..v.len()).step_by(37) {
            let x = v.point(flat);
            let g = |a: f64, b: f64| (-(x[0] - a).powi(2) - (x[1] - b).powi(2)).exp();
            assert!((v.data[flat] - (g(0.0, 0.0) - 0.5 * g(1.0, -1.0))).abs() < 1e-12);
        }
        let cropped = crop_centered(&v, 2.0);
        assert_eq!(cropped.points_per_axis, 17);
        assert_eq!(cropped.origin, -2.0);
    }

    #[test]
    fn rejects_small_torus() {
        let c = LatticeArray::zeros(1, 10);
        assert!(Synthesis::new(&c, 1.0, 8, 2, &[0.0; 16]).is_err());
    }
}
