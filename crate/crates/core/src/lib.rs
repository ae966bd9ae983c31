//! Wavelet, fractal and chaos analysis of nonstationary time series.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations.

pub mod cwt;
pub mod dwt;
pub mod error;
mod fft;
pub mod lyapunov;
pub mod mfdfa;
pub mod scalar;
pub mod signal;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::{LineFit, Real};
pub use signal::{Profile, TimeSeries};

pub type TimeSeries64 = signal::TimeSeries<f64>;
pub type TimeSeries32 = signal::TimeSeries<f32>;
pub type Profile64 = signal::Profile<f64>;
pub type WaveletSpec64 = dwt::WaveletSpec<f64>;
pub type Scalogram64 = cwt::Scalogram<f64>;
pub type GlobalPower64 = cwt::GlobalPower<f64>;
pub type PhaseSeries64 = cwt::PhaseSeries<f64>;
pub type PowerSpectrum64 = spectral::PowerSpectrum<f64>;
pub type MfdfaConfig64 = mfdfa::MfdfaConfig<f64>;
pub type FluctuationTable64 = mfdfa::FluctuationTable<f64>;
