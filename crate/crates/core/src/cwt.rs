//! Continuous Morlet wavelet transform.
//!
//! Coefficients are computed scale by scale as a frequency-domain product:
//!
//! ```text
//! W(s, n) = IFFT[ X(ω_k) · sqrt(2π s / δt) · ψ̂*(s ω_k) ],
//! ψ̂(sω) = π^{-1/4} H(ω) exp(-(sω - ω0)² / 2)
//! ```
//!
//! which is the unit-energy (`1/√s`) convention: white noise of variance σ²
//! has `E|W|² = σ²` at every resolved scale. [`CwtNorm::Literal`] rescales
//! by `sqrt(δt/s)`, giving the plain `1/s` normalisation of the transform
//! integral.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{mean, variance, Real};
use crate::signal::TimeSeries;

/// Default Morlet centre frequency.
pub const DEFAULT_OMEGA0: f64 = 6.0;
/// Sub-octaves per octave in the default scale grid.
pub const SUBOCTAVES: usize = 8;
/// Decorrelation factor for time-averaged Morlet power.
pub const MORLET_GAMMA: f64 = 2.32;
const SIGNIFICANCE_LEVEL: f64 = 0.95;
/// One-sided standard normal quantile at 0.95.
const Z_95: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CwtNorm {
    /// `1/√s`, unit energy at every scale.
    #[default]
    Energy,
    /// `1/s`, the literal transform-integral normalisation.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    /// Zero-pad to a power of two at least twice the input length.
    #[default]
    Zero,
    /// No padding: the signal is treated as one period of a periodic signal.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwtConfig<T = f64> {
    pub omega0: T,
    pub norm: CwtNorm,
    pub padding: Padding,
}

impl<T: Real> Default for CwtConfig<T> {
    fn default() -> Self {
        Self {
            omega0: T::c(DEFAULT_OMEGA0),
            norm: CwtNorm::Energy,
            padding: Padding::Zero,
        }
    }
}

/// Equivalent Fourier period per unit scale, `4π / (ω0 + sqrt(2 + ω0²))`.
pub fn fourier_factor<T: Real>(omega0: T) -> T {
    T::c(4.0) * T::PI() / (omega0 + (T::c(2.0) + omega0 * omega0).sqrt())
}

/// Dyadic grid with [`SUBOCTAVES`] steps per octave from `2δt` to `Nδt/4`.
pub fn default_scales<T: Real>(n: usize, dt: T) -> Vec<T> {
    let s0 = T::c(2.0) * dt;
    let smax = T::from_usize_lossy(n) * dt / T::c(4.0);
    let step = T::c(1.0 / SUBOCTAVES as f64);
    let mut out = Vec::new();
    let mut j = 0usize;
    loop {
        let s = s0 * T::c(2.0).powf(step * T::from_usize_lossy(j));
        if s > smax * T::c(1.0 + 1e-12) {
            break;
        }
        out.push(s);
        j += 1;
    }
    out
}

/// Scales whose equivalent Fourier periods are `periods`.
pub fn scales_for_periods<T: Real>(periods: &[T], omega0: T) -> Vec<T> {
    let ff = fourier_factor(omega0);
    periods.iter().map(|&p| p / ff).collect()
}

/// Complex coefficients over a scale × time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram<T = f64> {
    /// One row per scale.
    pub coeffs: Vec<Vec<Complex<T>>>,
    /// Seconds, ascending.
    pub scales: Vec<T>,
    /// Seconds.
    pub times: Vec<T>,
    pub omega0: T,
    /// Largest scale (seconds) free of edge effects at each time.
    pub coi: Vec<T>,
    pub dt: T,
    pub norm: CwtNorm,
    /// Variance of the analysed signal.
    pub variance: T,
    /// Lag-1 autocorrelation of the analysed signal.
    pub lag1: T,
}

impl<T: Real> Scalogram<T> {
    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn fourier_factor(&self) -> T {
        fourier_factor(self.omega0)
    }

    pub fn periods(&self) -> Vec<T> {
        let ff = self.fourier_factor();
        self.scales.iter().map(|&s| s * ff).collect()
    }

    pub fn power(&self, si: usize, ti: usize) -> T {
        self.coeffs[si][ti].norm_sqr()
    }

    /// True when the point is affected by the series edges.
    pub fn in_coi(&self, si: usize, ti: usize) -> bool {
        self.scales[si] > self.coi[ti]
    }

    /// Index of the scale closest (in log) to `scale`.
    pub fn nearest_scale_index(&self, scale: T) -> usize {
        let target = scale.ln();
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, &s) in self.scales.iter().enumerate() {
            let d = (s.ln() - target).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Ratio between neighbouring scales (1 for a single scale).
    pub fn scale_ratio(&self) -> T {
        if self.scales.len() < 2 {
            T::one()
        } else {
            let n = T::from_usize_lossy(self.scales.len() - 1);
            (self.scales[self.scales.len() - 1] / self.scales[0]).powf(T::one() / n)
        }
    }

    /// Power divided by the signal variance.
    pub fn normalized_power(&self) -> Vec<Vec<T>> {
        let v = if self.variance > T::zero() {
            self.variance
        } else {
            T::one()
        };
        self.coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.norm_sqr() / v).collect())
            .collect()
    }
}

/// Morlet transform with the default configuration.
pub fn cwt_morlet<T: Real>(x: &TimeSeries<T>, scales: &[T], omega0: T) -> Result<Scalogram<T>> {
    cwt_morlet_with(
        x,
        scales,
        &CwtConfig {
            omega0,
            ..CwtConfig::default()
        },
    )
}

pub fn cwt_morlet_with<T: Real>(x: &TimeSeries<T>, scales: &[T], cfg: &CwtConfig<T>) -> Result<Scalogram<T>> {
    let n = x.len();
    let dt = x.dt();
    if cfg.omega0 < T::c(5.0) {
        return Err(Error::InvalidParameter(format!(
            "omega0 must be >= 5 for an admissible Morlet, got {}",
            cfg.omega0
        )));
    }
    if scales.is_empty() {
        return Err(Error::InvalidParameter("no scales".into()));
    }
    if scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("scales must be strictly ascending".into()));
    }
    let smin = T::c(2.0) * dt;
    let smax = T::from_usize_lossy(n) * dt / T::c(2.0);
    let slack = T::c(1e-9);
    for &s in scales {
        if !(s >= smin * (T::one() - slack) && s <= smax * (T::one() + slack)) {
            return Err(Error::ScaleOutOfRange {
                scale: s.to_f64_lossy(),
                min: smin.to_f64_lossy(),
                max: smax.to_f64_lossy(),
            });
        }
    }

    let m = match cfg.padding {
        Padding::Zero => (2 * n).next_power_of_two(),
        Padding::Periodic => n,
    };
    let mu = mean(x.samples());
    let mut spectrum: Vec<Complex<T>> = x
        .samples()
        .iter()
        .map(|&v| Complex::new(v - mu, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(m)
        .collect();
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(m).process(&mut spectrum);
    let inverse: Arc<dyn Fft<T>> = planner.plan_fft_inverse(m);

    let mm = T::from_usize_lossy(m);
    let two_pi = T::TAU();
    let omega: Vec<T> = (0..m)
        .map(|k| {
            let kk = if k <= m / 2 {
                T::from_usize_lossy(k)
            } else {
                -T::from_usize_lossy(m - k)
            };
            two_pi * kk / (mm * dt)
        })
        .collect();
    let quarter_pi = T::PI().powf(T::c(-0.25));

    let coeffs: Vec<Vec<Complex<T>>> = scales
        .par_iter()
        .map(|&s| {
            let mut norm = (two_pi * s / dt).sqrt() * quarter_pi;
            if cfg.norm == CwtNorm::Literal {
                norm = norm * (dt / s).sqrt();
            }
            let mut row: Vec<Complex<T>> = spectrum
                .iter()
                .zip(&omega)
                .map(|(&xk, &w)| {
                    if w > T::zero() {
                        let u = s * w - cfg.omega0;
                        xk * (norm * (-u * u / T::c(2.0)).exp())
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                })
                .collect();
            inverse.process(&mut row);
            row.truncate(n);
            row.iter_mut().for_each(|c| *c = *c / mm);
            row
        })
        .collect();

    let sqrt2 = T::c(2.0).sqrt();
    let coi = (0..n)
        .map(|i| T::from_usize_lossy(i.min(n - 1 - i)) * dt / sqrt2)
        .collect();
    let times = (0..n).map(|i| x.time(i)).collect();
    Ok(Scalogram {
        coeffs,
        scales: scales.to_vec(),
        times,
        omega0: cfg.omega0,
        coi,
        dt,
        norm: cfg.norm,
        variance: variance(x.samples()),
        lag1: lag1_autocorrelation(x.samples()),
    })
}

pub(crate) fn lag1_autocorrelation<T: Real>(x: &[T]) -> T {
    let m = mean(x);
    let c0: T = x.iter().map(|&v| (v - m) * (v - m)).sum();
    if c0 <= T::zero() {
        return T::zero();
    }
    let c1: T = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    c1 / c0
}

/// Noise model the significance levels are computed against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    White,
    /// AR(1) red noise with the given lag-1 coefficient.
    Red(f64),
    /// AR(1) red noise with the lag-1 coefficient estimated from the signal.
    RedEstimated,
}

/// Degrees of freedom of the chi-squared test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    /// Two degrees of freedom, the pointwise test for a single coefficient.
    #[default]
    Pointwise,
    /// `ν = 2 sqrt(1 + (n_a δt / (γ s))²)`, for power averaged over `n_a` times.
    TimeAveraged,
}

/// Time-averaged wavelet power per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPower<T = f64> {
    pub scales: Vec<T>,
    pub periods: Vec<T>,
    pub power: Vec<T>,
    pub significance_95: Vec<T>,
    /// Number of points outside the cone of influence per scale.
    pub n_averaged: Vec<usize>,
    /// Resolved background (estimated coefficients filled in).
    pub background: Background,
    pub variance: T,
}

impl<T: Real> GlobalPower<T> {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn is_significant(&self, i: usize) -> bool {
        self.power[i] > self.significance_95[i]
    }

    pub fn normalized_power(&self) -> Vec<T> {
        let v = if self.variance > T::zero() {
            self.variance
        } else {
            T::one()
        };
        self.power.iter().map(|&p| p / v).collect()
    }
}

/// `χ²_ν` quantile at 0.95 divided by `ν`; exact for two degrees of freedom,
/// Wilson–Hilferty otherwise.
pub fn chi2_95_over_dof(dof: f64) -> f64 {
    if (dof - 2.0).abs() < 1e-12 {
        return -(1.0 - SIGNIFICANCE_LEVEL).ln();
    }
    let a = 2.0 / (9.0 * dof);
    (1.0 - a + Z_95 * a.sqrt()).powi(3)
}

/// Normalised AR(1) spectrum at a given period, unit mean.
pub fn red_noise_spectrum(alpha: f64, dt: f64, period: f64) -> f64 {
    let c = (2.0 * std::f64::consts::PI * dt / period).cos();
    (1.0 - alpha * alpha) / (1.0 + alpha * alpha - 2.0 * alpha * c)
}

/// Time average of `|W|²` outside the cone of influence with its 95%
/// significance level. Scales with no point outside the cone are omitted.
pub fn global_power<T: Real>(sg: &Scalogram<T>, background: Background) -> Result<GlobalPower<T>> {
    global_power_with(sg, background, Dof::Pointwise)
}

pub fn global_power_with<T: Real>(sg: &Scalogram<T>, background: Background, dof: Dof) -> Result<GlobalPower<T>> {
    if sg.scales.is_empty() || sg.times.is_empty() {
        return Err(Error::Validation("empty scalogram".into()));
    }
    let background = match background {
        Background::RedEstimated => Background::Red(sg.lag1.to_f64_lossy().clamp(0.0, 0.999)),
        b => b,
    };
    let ff = sg.fourier_factor();
    let dt = sg.dt.to_f64_lossy();
    let var = sg.variance.to_f64_lossy();
    let mut out = GlobalPower {
        scales: Vec::new(),
        periods: Vec::new(),
        power: Vec::new(),
        significance_95: Vec::new(),
        n_averaged: Vec::new(),
        background,
        variance: sg.variance,
    };
    for (si, &s) in sg.scales.iter().enumerate() {
        let (sum, count) = (0..sg.n_times())
            .filter(|&ti| !sg.in_coi(si, ti))
            .fold((T::zero(), 0usize), |(acc, c), ti| (acc + sg.power(si, ti), c + 1));
        if count == 0 {
            continue;
        }
        let period = s * ff;
        let pf = period.to_f64_lossy();
        let bg = match background {
            Background::White => 1.0,
            Background::Red(a) => red_noise_spectrum(a, dt, pf),
            Background::RedEstimated => unreachable!("resolved above"),
        };
        let nu = match dof {
            Dof::Pointwise => 2.0,
            Dof::TimeAveraged => {
                let r = count as f64 * dt / (MORLET_GAMMA * s.to_f64_lossy());
                2.0 * (1.0 + r * r).sqrt()
            }
        };
        let mut thr = var * bg * chi2_95_over_dof(nu);
        if sg.norm == CwtNorm::Literal {
            thr *= dt / s.to_f64_lossy();
        }
        out.scales.push(s);
        out.periods.push(period);
        out.power.push(sum / T::from_usize_lossy(count));
        out.significance_95.push(T::c(thr));
        out.n_averaged.push(count);
    }
    Ok(out)
}

/// A local maximum of the global power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodPeak<T = f64> {
    pub period: T,
    pub power: T,
    pub significant: bool,
}

/// Maxima below this fraction of the strongest power are treated as noise.
pub const PEAK_FLOOR: f64 = 1e-9;

/// Interior local maxima by descending power (ties by ascending period).
pub fn dominant_periods<T: Real>(gp: &GlobalPower<T>, max_count: usize) -> Vec<PeriodPeak<T>> {
    let p = &gp.power;
    let top = p.iter().copied().fold(T::zero(), T::max);
    let floor = top * T::c(PEAK_FLOOR);
    let mut peaks: Vec<PeriodPeak<T>> = (1..p.len().saturating_sub(1))
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > floor)
        .map(|i| PeriodPeak {
            period: gp.periods[i],
            power: p[i],
            significant: gp.is_significant(i),
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.power
            .partial_cmp(&a.power)
            .expect("finite power")
            .then(a.period.partial_cmp(&b.period).expect("finite period"))
    });
    peaks.truncate(max_count);
    peaks
}

/// Phase and amplitude of one scalogram row.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries<T = f64> {
    /// Actual scale used (seconds).
    pub scale: T,
    pub period: T,
    pub times: Vec<T>,
    /// Wrapped to (-π, π].
    pub phase: Vec<T>,
    pub amplitude: Vec<T>,
    /// False where the amplitude is too small for a defined phase.
    pub defined: Vec<bool>,
    /// True outside the cone of influence.
    pub interior: Vec<bool>,
    /// Ratio between neighbouring scales of the source grid.
    pub scale_ratio: T,
    pub dt: T,
}

/// Relative amplitude below which phase is reported undefined.
pub const PHASE_AMPLITUDE_EPS: f64 = 1e-9;

pub fn phase_at_scale<T: Real>(sg: &Scalogram<T>, scale: T) -> Result<PhaseSeries<T>> {
    if sg.scales.is_empty() {
        return Err(Error::Validation("empty scalogram".into()));
    }
    let si = sg.nearest_scale_index(scale);
    let row = &sg.coeffs[si];
    let amplitude: Vec<T> = row.iter().map(|c| c.norm()).collect();
    let phase: Vec<T> = row.iter().map(|c| wrap_phase(c.arg())).collect();
    let max = amplitude.iter().copied().fold(T::zero(), T::max);
    let eps = max * T::c(PHASE_AMPLITUDE_EPS);
    let defined = amplitude.iter().map(|&a| a > eps && a > T::zero()).collect();
    let interior = (0..sg.n_times()).map(|ti| !sg.in_coi(si, ti)).collect();
    Ok(PhaseSeries {
        scale: sg.scales[si],
        period: sg.scales[si] * sg.fourier_factor(),
        times: sg.times.clone(),
        phase,
        amplitude,
        defined,
        interior,
        scale_ratio: sg.scale_ratio(),
        dt: sg.dt,
    })
}

/// Wraps an angle into (-π, π].
pub fn wrap_phase<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut w = a - two_pi * ((a + T::PI()) / two_pi).floor();
    if w <= -T::PI() {
        w = w + two_pi;
    }
    w
}

/// Unwraps a phase sequence so successive jumps stay below π.
pub fn unwrap_phase<T: Real>(phase: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = T::zero();
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p - phase[i - 1];
            if d > T::PI() {
                offset = offset - T::TAU();
            } else if d < -T::PI() {
                offset = offset + T::TAU();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Largest tolerated deviation from the reference phase difference.
pub const SYNC_TOLERANCE: f64 = 0.2;
/// Minimum synchronised duration in characteristic periods.
pub const SYNC_MIN_PERIODS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyncSegment<T = f64> {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> SyncSegment<T> {
    pub fn duration(&self) -> T {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDifference<T = f64> {
    /// Wrapped `φ_a - φ_b`.
    pub delta: Vec<T>,
    /// Reference value the segments are measured against.
    pub center: T,
    /// Samples that entered the analysis (defined phases, outside the cone).
    pub usable: Vec<bool>,
    pub segments: Vec<SyncSegment<T>>,
}

/// Wrapped phase difference and the intervals where it stays within 0.2 rad
/// of its median for at least three characteristic periods.
pub fn phase_difference<T: Real>(a: &PhaseSeries<T>, b: &PhaseSeries<T>) -> Result<PhaseDifference<T>> {
    if a.phase.len() != b.phase.len() {
        return Err(Error::LengthMismatch {
            left: a.phase.len(),
            right: b.phase.len(),
        });
    }
    let ratio = a.scale_ratio.max(b.scale_ratio).max(T::c(1.0 + 1e-9));
    if (a.scale / b.scale).ln().abs() > ratio.ln() * T::c(1.0 + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "scales {} and {} differ by more than one bin",
            a.scale, b.scale
        )));
    }
    let delta: Vec<T> = a.phase.iter().zip(&b.phase).map(|(&x, &y)| wrap_phase(x - y)).collect();
    let usable: Vec<bool> = (0..delta.len())
        .map(|i| a.defined[i] && b.defined[i] && a.interior[i] && b.interior[i])
        .collect();

    // circular mean as a reference, then the median of deviations from it
    let (sx, sy) = delta
        .iter()
        .zip(&usable)
        .filter(|(_, &u)| u)
        .fold((T::zero(), T::zero()), |(x, y), (&d, _)| (x + d.cos(), y + d.sin()));
    let reference = sy.atan2(sx);
    let mut devs: Vec<T> = delta
        .iter()
        .zip(&usable)
        .filter(|(_, &u)| u)
        .map(|(&d, _)| wrap_phase(d - reference))
        .collect();
    let center = if devs.is_empty() {
        T::zero()
    } else {
        devs.sort_by(|x, y| x.partial_cmp(y).expect("finite phase"));
        let k = devs.len();
        let med = if k % 2 == 1 {
            devs[k / 2]
        } else {
            (devs[k / 2 - 1] + devs[k / 2]) / T::c(2.0)
        };
        wrap_phase(reference + med)
    };

    let period = (a.period + b.period) / T::c(2.0);
    let min_len = (T::c(SYNC_MIN_PERIODS) * period / a.dt)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    let tol = T::c(SYNC_TOLERANCE);
    let mut segments = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=delta.len() {
        let ok = i < delta.len() && usable[i] && wrap_phase(delta[i] - center).abs() < tol;
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_len.max(1) {
                    segments.push(SyncSegment {
                        start: s,
                        end: i,
                        t_start: a.times[s],
                        t_end: a.times[i - 1] + a.dt,
                    });
                }
                start = None;
            }
            _ => {}
        }
    }
    Ok(PhaseDifference {
        delta,
        center,
        usable,
        segments,
    })
}
