//! Test functions with known Sobolev regularity and exact derivatives.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetKind {
    /// Centred cardinal B-spline of the given degree, tensorised over `dim` axes.
    BSpline { degree: usize },
    /// `exp(-|x|²/(2σ²))`.
    GaussianBump { sigma: f64 },
    /// `Π_i (cos(ω x_i) + ½ sin(2ω x_i/3))`, periodic with period `6π/ω`
    /// and band-limited to `|ξ_i| ≤ ω`.
    BandLimited { omega: f64 },
    Zero,
}

/// A target `f: ℝⁿ → ℝ` with the largest `k` for which `f ∈ W_p^k` for all `p` is certified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFunction {
    pub id: String,
    pub dim: usize,
    pub kind: TargetKind,
    /// `None` means `f ∈ W_p^k` for every `k`.
    pub sobolev_k: Option<usize>,
    /// Radius of the band containing `supp f̂`, when finite.
    pub band_limit: Option<f64>,
    /// `f` vanishes (to rounding) outside `[-support, support]ⁿ`; infinite for periodic targets.
    pub support: f64,
}

impl TargetFunction {
    /// B-spline of degree `d`: the `d`-th derivative is piecewise constant and
    /// bounded, so `f ∈ W_p^d` for every `p`, while the `(d+1)`-th has jumps.
    pub fn bspline(degree: usize, dim: usize) -> Result<Self> {
        if !(1..=5).contains(&degree) || dim == 0 {
            return Err(Error::Parameter(format!("B-spline degree must be 1..=5 and dim ≥ 1, got {degree}, {dim}")));
        }
        Ok(Self {
            id: format!("bspline{degree}_{dim}d"),
            dim,
            kind: TargetKind::BSpline { degree },
            sobolev_k: Some(degree),
            band_limit: None,
            support: (degree + 1) as f64 / 2.0,
        })
    }

    /// A Gaussian bump; analytic, so every `k` is certified.
    pub fn gaussian(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) || dim == 0 {
            return Err(Error::Parameter(format!("invalid Gaussian width {sigma} or dim {dim}")));
        }
        Ok(Self {
            id: format!("gauss{sigma}_{dim}d"),
            dim,
            kind: TargetKind::GaussianBump { sigma },
            sobolev_k: None,
            band_limit: None,
            // exp(-r²/(2σ²)) < 1e-300 beyond r = 37.2σ.
            support: 37.2 * sigma,
        })
    }

    pub fn band_limited(omega: f64, dim: usize) -> Result<Self> {
        if !(omega > 0.0) || dim == 0 {
            return Err(Error::Parameter(format!("invalid band {omega} or dim {dim}")));
        }
        Ok(Self {
            id: format!("band{omega}_{dim}d"),
            dim,
            kind: TargetKind::BandLimited { omega },
            sobolev_k: None,
            band_limit: Some(omega),
            support: f64::INFINITY,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            id: format!("zero_{dim}d"),
            dim,
            kind: TargetKind::Zero,
            sobolev_k: None,
            band_limit: Some(0.0),
            support: 0.0,
        }
    }

    /// Period of a periodic target.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            TargetKind::BandLimited { omega } => Some(6.0 * PI / omega),
            _ => None,
        }
    }

    pub fn certifies(&self, k: usize) -> bool {
        self.sobolev_k.is_none_or(|c| k <= c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.derivative(&vec![0; x.len()], x)
    }

    /// `D^α f(x)`. For B-splines orders above the degree are zero almost everywhere.
    pub fn derivative(&self, alpha: &[usize], x: &[f64]) -> f64 {
        alpha.iter().zip(x).map(|(&a, &t)| self.axis_derivative(a, t)).product()
    }

    /// Every target is a tensor product `Π_i g(x_i)`; this is `g^{(r)}(t)`.
    pub fn axis_derivative(&self, r: usize, t: f64) -> f64 {
        match self.kind {
            TargetKind::BSpline { degree } => bspline_derivative(degree, r, t),
            TargetKind::GaussianBump { sigma } => gaussian_derivative(sigma, r, t),
            TargetKind::BandLimited { omega } => band_derivative(omega, r, t),
            TargetKind::Zero => 0.0,
        }
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// `bspline<d>[:dim]`, `gauss:<sigma>[:dim]`, `band:<omega>[:dim]`, `zero[:dim]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let dim_at = |i: usize| -> Result<usize> {
            parts.get(i).map_or(Ok(1), |d| d.parse().map_err(|_| Error::Parameter(format!("bad dimension in {s:?}"))))
        };
        let num_at = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parameter(format!("missing parameter in {s:?}")))?
                .parse()
                .map_err(|_| Error::Parameter(format!("bad parameter in {s:?}")))
        };
        match parts[0] {
            "zero" => Ok(Self::zero(dim_at(1)?)),
            "gauss" => Self::gaussian(num_at(1)?, dim_at(2)?),
            "band" => Self::band_limited(num_at(1)?, dim_at(2)?),
            name if name.starts_with("bspline") => {
                let d = name["bspline".len()..].parse().map_err(|_| Error::Parameter(format!("bad degree in {s:?}")))?;
                Self::bspline(d, dim_at(1)?)
            }
            _ => Err(Error::Parameter(format!("unknown target {s:?}"))),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `r`-th derivative of the centred B-spline of degree `d`,
/// `B_d(x) = (1/d!) Σ_i (−1)^i C(d+1, i) (x + (d+1)/2 − i)_+^d`.
pub fn bspline_derivative(d: usize, r: usize, x: f64) -> f64 {
    let half = (d + 1) as f64 / 2.0;
    if x.abs() >= half || r > d {
        return 0.0;
    }
    let pow = d - r;
    let mut sum = 0.0;
    for i in 0..=d + 1 {
        let u = x + half - i as f64;
        if u > 0.0 {
            let term = if pow == 0 { 1.0 } else { u.powi(pow as i32) };
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binomial(d + 1, i) * term;
        }
    }
    sum / factorial(pow)
}

/// `d^r/dx^r exp(−x²/(2σ²)) = (−1/σ)^r He_r(x/σ) exp(−x²/(2σ²))`.
pub fn gaussian_derivative(sigma: f64, r: usize, x: f64) -> f64 {
    let u = x / sigma;
    let (mut h0, mut h1) = (1.0, u);
    let he = match r {
        0 => 1.0,
        1 => u,
        _ => {
            for n in 1..r {
                let h2 = u * h1 - n as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    };
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    sign * he * (-0.5 * u * u).exp() / sigma.powi(r as i32)
}

fn band_derivative(omega: f64, r: usize, x: f64) -> f64 {
    let w2 = 2.0 * omega / 3.0;
    let phase = r as f64 * PI / 2.0;
    omega.powi(r as i32) * (omega * x + phase).cos() + 0.5 * w2.powi(r as i32) * (w2 * x + phase).sin()
}
