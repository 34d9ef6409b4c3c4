//! Cardinal interpolation on `hℤⁿ` by translates of the Gaussian `e^{-|x|²}`.
//!
//! The crate is organised around the Fourier multiplier `m_h` of the
//! Lagrange function:
//!
//! * [`multiplier`]: stable evaluation of `m_h`, its derivatives and tensor products.
//! * [`lagrange`]: the Lagrange function `χ_h` by a dense collocation solve and by
//!   Fourier coefficients of the reciprocal symbol.
//! * [`interpolator`] and [`norms`]: the interpolation operator `I_h` and discrete
//!   Lebesgue/Sobolev norms.
//! * [`cutoff`] and [`quasi`]: a smooth frequency cutoff and the band-limited
//!   quasi-interpolant built from it.
//! * [`analysis`]: decay of `m_h^∨`, multiplier-norm bounds and aliasing diagnostics.
//! * [`experiments`]: convergence, log-factor and stability sweeps with reports.
//! * [`oracles`]: slow independent reference implementations used for verification.
//!
//! Supporting pieces: [`spectral`] (periodic synthesis with a sampled symbol and
//! exact derivatives), [`table`] (uniform tables with local interpolation),
//! [`fft`], [`quad`], [`fit`] and [`lattice`].

pub mod analysis;
pub mod cutoff;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod fit;
pub mod interpolator;
pub mod lagrange;
pub mod lattice;
pub mod multiplier;
pub mod norms;
pub mod oracles;
pub mod quad;
pub mod quasi;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
pub use lattice::{GridValues, LatticeArray};
pub use multiplier::MultiplierContext;
