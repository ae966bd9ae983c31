//! Fourier power spectra and power-law fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::{linear_fit, Real};
use crate::signal::TimeSeries;

/// Slope of the neutral-turbulence (Kolmogorov) regime.
pub const NEUTRAL_TURBULENCE_SLOPE: f64 = -5.0 / 3.0;
/// Slope of the viscous-dissipation regime.
pub const VISCOUS_DISSIPATION_SLOPE: f64 = -7.0;
/// Log-spaced bands per decade used to average periodogram bins before fitting.
pub const BANDS_PER_DECADE: f64 = 8.0;
/// Minimum number of positive bins inside a fit band.
pub const MIN_FIT_BINS: usize = 8;
/// Default relative tolerance for a preset slope match.
pub const HEISENBERG_REL_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum<T = f64> {
    pub freqs: Vec<T>,
    pub power: Vec<T>,
    /// Length of the source signal (zero when built from other estimates).
    pub n: usize,
    pub window: Window,
}

impl<T: Real> PowerSpectrum<T> {
    /// Wraps externally computed `(freq, power)` pairs, for instance a
    /// global wavelet spectrum. Frequencies are sorted ascending.
    pub fn from_parts(freqs: Vec<T>, power: Vec<T>) -> Result<Self> {
        if freqs.len() != power.len() {
            return Err(Error::LengthMismatch {
                left: freqs.len(),
                right: power.len(),
            });
        }
        if freqs.iter().chain(&power).any(|v| !v.is_finite())
            || power.iter().any(|&p| p < T::zero())
            || freqs.iter().any(|&f| f < T::zero())
        {
            return Err(Error::Validation(
                "spectrum must be finite, frequencies and power non-negative".into(),
            ));
        }
        let mut pairs: Vec<(T, T)> = freqs.into_iter().zip(power).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let (freqs, power) = pairs.into_iter().unzip();
        Ok(Self {
            freqs,
            power,
            n: 0,
            window: Window::None,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Bin spacing of a periodogram (zero for fewer than two bins).
    pub fn df(&self) -> T {
        if self.freqs.len() < 2 {
            T::zero()
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }
}

/// One-sided periodogram normalised so that `Σ P·Δf = mean(x²)` for the
/// rectangular window.
pub fn power_spectrum<T: Real>(x: &TimeSeries<T>, window: Window) -> Result<PowerSpectrum<T>> {
    let n = x.len();
    if n < 8 {
        return Err(Error::TooShort { len: n, needed: 8 });
    }
    let nn = T::from_usize_lossy(n);
    let (data, gain): (Vec<T>, T) = match window {
        Window::None => (x.samples().to_vec(), T::one()),
        Window::Hann => {
            let w: Vec<T> = (0..n)
                .map(|i| {
                    let ph = T::TAU() * T::from_usize_lossy(i) / nn;
                    T::c(0.5) * (T::one() - ph.cos())
                })
                .collect();
            let u = w.iter().map(|&v| v * v).sum::<T>() / nn;
            (x.samples().iter().zip(&w).map(|(&a, &b)| a * b).collect(), u)
        }
    };
    let spec = fft::forward_real(&data);
    let df = x.sample_rate() / nn;
    let half = n / 2;
    let norm = T::one() / (nn * nn * df * gain);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in spec.iter().enumerate().take(half + 1) {
        let mut p = c.norm_sqr() * norm;
        let nyquist_bin = n.is_multiple_of(2) && k == half;
        if k != 0 && !nyquist_bin {
            p = p * T::c(2.0);
        }
        freqs.push(T::from_usize_lossy(k) * df);
        power.push(p);
    }
    Ok(PowerSpectrum {
        freqs,
        power,
        n,
        window,
    })
}

/// Log-log least-squares fit of a spectrum over a frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumFit<T = f64> {
    /// Signed exponent: negative for decaying spectra.
    pub slope: T,
    /// log10 power at 1 Hz.
    pub intercept: T,
    pub band: (T, T),
    pub r_squared: T,
    /// Positive bins inside the band.
    pub n_points: usize,
    /// Log-spaced bands the bins were averaged into.
    pub n_bands: usize,
}

/// Fits `log10 P = slope·log10 f + intercept` over `band`.
///
/// Bins are first averaged, in the log domain, into bands 1/8 decade wide so
/// the dense high-frequency end does not dominate the fit. Averaging logs keeps
/// an exact power law exact.
pub fn fit_power_law<T: Real>(ps: &PowerSpectrum<T>, band: (T, T)) -> Result<SpectrumFit<T>> {
    let (f_lo, f_hi) = band;
    if !(f_lo < f_hi) {
        return Err(Error::InvalidParameter(format!(
            "band must satisfy f_lo < f_hi, got [{f_lo}, {f_hi}]"
        )));
    }
    let insufficient = |bins| Error::InsufficientBand {
        f_lo: f_lo.to_f64_lossy(),
        f_hi: f_hi.to_f64_lossy(),
        bins,
        needed: MIN_FIT_BINS,
    };
    let per_decade = T::c(BANDS_PER_DECADE);
    let mut groups: Vec<(i64, T, T, usize)> = Vec::new();
    let mut bins = 0usize;
    for (&f, &p) in ps.freqs.iter().zip(&ps.power) {
        if f < f_lo || f > f_hi || f <= T::zero() || p <= T::zero() {
            continue;
        }
        bins += 1;
        let lf = f.log10();
        let lp = p.log10();
        let idx = (lf * per_decade).floor().to_i64().unwrap_or(i64::MIN);
        match groups.last_mut() {
            Some(g) if g.0 == idx => {
                g.1 = g.1 + lf;
                g.2 = g.2 + lp;
                g.3 += 1;
            }
            _ => groups.push((idx, lf, lp, 1)),
        }
    }
    if bins < MIN_FIT_BINS || groups.len() < 2 {
        return Err(insufficient(bins));
    }
    let (xs, ys): (Vec<T>, Vec<T>) = groups
        .iter()
        .map(|&(_, sx, sy, c)| {
            let c = T::from_usize_lossy(c);
            (sx / c, sy / c)
        })
        .unzip();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| insufficient(bins))?;
    Ok(SpectrumFit {
        slope: fit.slope,
        intercept: fit.intercept,
        band,
        r_squared: fit.r_squared,
        n_points: bins,
        n_bands: groups.len(),
    })
}

/// Hurst exponent from the magnitude of a spectral exponent, `H = (|α|-1)/2`.
/// Values outside (0, 1) are returned inside [`Error::OutOfRange`].
pub fn hurst_from_alpha<T: Real>(alpha_abs: T) -> Result<T> {
    let h = (alpha_abs - T::one()) / T::c(2.0);
    if h > T::zero() && h < T::one() {
        Ok(h)
    } else {
        Err(Error::OutOfRange { h: h.to_f64_lossy() })
    }
}

/// Piecewise fractal dimension of a spectrum with exponent `β = |α|`:
/// `(7-β)/2` above 3, `(5-β)/2` between 1 and 3, `(3-β)/2` below 1. The
/// boundaries 1 and 3 are rejected.
pub fn fractal_dimension<T: Real>(alpha_abs: T) -> Result<T> {
    let beta = alpha_abs.abs();
    let two = T::c(2.0);
    let one = T::one();
    let three = T::c(3.0);
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite exponent {beta}")));
    }
    if beta == one || beta == three {
        return Err(Error::BoundaryValue {
            beta: beta.to_f64_lossy(),
        });
    }
    let d = if beta > three {
        (T::c(7.0) - beta) / two
    } else if beta > one {
        (T::c(5.0) - beta) / two
    } else {
        (three - beta) / two
    };
    Ok(d)
}

/// Frequency of the strongest bin; ties resolve to the lower frequency.
pub fn dominant_frequency<T: Real>(ps: &PowerSpectrum<T>, exclude_dc: bool) -> Result<T> {
    let mut best: Option<(T, T)> = None;
    for (&f, &p) in ps.freqs.iter().zip(&ps.power) {
        if exclude_dc && f == T::zero() {
            continue;
        }
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((f, p)),
        }
    }
    best.map(|b| b.0)
        .ok_or_else(|| Error::Validation("empty spectrum".into()))
}

/// Result of comparing a fitted slope with a reference regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergFit<T = f64> {
    pub fit: SpectrumFit<T>,
    pub target_slope: T,
    pub tolerance: T,
    pub matches: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NeutralTurbulence,
    ViscousDissipation,
}

impl Regime {
    pub fn slope(self) -> f64 {
        match self {
            Regime::NeutralTurbulence => NEUTRAL_TURBULENCE_SLOPE,
            Regime::ViscousDissipation => VISCOUS_DISSIPATION_SLOPE,
        }
    }
}

/// Fits `band` and flags whether the slope is within `tolerance` of
/// `target_slope` (default `0.15·|target|`).
pub fn heisenberg_fit<T: Real>(
    ps: &PowerSpectrum<T>,
    band: (T, T),
    target_slope: T,
    tolerance: Option<T>,
) -> Result<HeisenbergFit<T>> {
    let fit = fit_power_law(ps, band)?;
    let tolerance = tolerance.unwrap_or_else(|| T::c(HEISENBERG_REL_TOLERANCE) * target_slope.abs());
    Ok(HeisenbergFit {
        fit,
        target_slope,
        tolerance,
        matches: (fit.slope - target_slope).abs() <= tolerance,
    })
}
