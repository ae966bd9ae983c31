//! Synthetic signals with known ground truth.
//!
//! Every generator is a pure function of its parameters and seed. Internal
//! arithmetic runs in `f64`; the result is converted to the requested scalar.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::Real;
use crate::signal::TimeSeries;

/// Largest circulant embedding tried before giving up.
const MAX_EMBEDDING_DOUBLINGS: u32 = 4;

/// Ring-down time constant of a rendered impact, in seconds.
pub const IMPACT_RING_DOWN: f64 = 2e-3;

/// Shortest rendered flight, in radians of drive phase. The map itself has
/// no lower bound on the phase advance; the renderer needs time to move.
pub const MIN_FLIGHT_PHASE: f64 = PI / 2.0;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussians(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn to_series<T: Real>(v: Vec<f64>, rate: T, label: String) -> Result<TimeSeries<T>> {
    Ok(TimeSeries::new(v.into_iter().map(T::c).collect(), rate)?.with_label(label))
}

fn check_pow2(n: usize, min: usize) -> Result<()> {
    if n < min || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "length must be a power of two >= {min}, got {n}"
        )));
    }
    Ok(())
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Fractional Gaussian noise by circulant embedding (exact covariance).
pub fn gen_fgn<T: Real>(hurst: f64, n: usize, seed: u64, rate: T) -> Result<TimeSeries<T>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!("H must lie in (0,1), got {hurst}")));
    }
    check_pow2(n, 2)?;
    let values = fgn_samples(hurst, n, seed)?;
    to_series(values, rate, format!("fgn H={hurst}"))
}

fn fgn_samples(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut m = 2 * n;
    for _ in 0..=MAX_EMBEDDING_DOUBLINGS {
        let half = m / 2;
        let mut row: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
        for k in 0..=half {
            let c = fgn_autocovariance(hurst, k);
            row[k] = Complex::new(c, 0.0);
            if k > 0 && k < half {
                row[m - k] = Complex::new(c, 0.0);
            }
        }
        fft::forward(&mut row);
        let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
        let scale = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if eig.iter().any(|&l| l < -1e-10 * scale) {
            m *= 2;
            continue;
        }
        let mut r = rng(seed);
        let mut w: Vec<Complex<f64>> = eig
            .iter()
            .map(|&l| {
                let a: f64 = r.sample(StandardNormal);
                let b: f64 = r.sample(StandardNormal);
                Complex::new(a, b) * (l.max(0.0) / m as f64).sqrt()
            })
            .collect();
        fft::forward(&mut w);
        return Ok(w[..n].iter().map(|c| c.re).collect());
    }
    Err(Error::Embedding { size: m / 2 })
}

/// Fractional Brownian motion of Hurst index `hurst`, `n` samples starting
/// at zero, built as the cumulative sum of exact fractional Gaussian noise.
pub fn gen_fbm<T: Real>(hurst: f64, n: usize, seed: u64, rate: T) -> Result<TimeSeries<T>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!("H must lie in (0,1), got {hurst}")));
    }
    check_pow2(n, 256)?;
    let inc = fgn_samples(hurst, n, seed)?;
    let mut acc = 0.0;
    let mut path = Vec::with_capacity(n);
    path.push(0.0);
    for &g in &inc[..n - 1] {
        acc += g;
        path.push(acc);
    }
    to_series(path, rate, format!("fbm H={hurst}"))
}

/// Gaussian noise whose mean power spectrum falls as `f^-beta`.
///
/// The output is periodic by construction and normalised to unit variance.
pub fn gen_power_law_noise<T: Real>(beta: f64, n: usize, seed: u64, rate: T) -> Result<TimeSeries<T>> {
    if !(0.0..=8.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta must lie in [0, 8], got {beta}")));
    }
    check_pow2(n, 8)?;
    let mut r = rng(seed);
    let white = gaussians(&mut r, n);
    if beta == 0.0 {
        let v = normalise(white);
        return to_series(v, rate, "white noise".into());
    }
    let mut spec = fft::forward_real(&white);
    spec[0] = Complex::new(0.0, 0.0);
    for (k, c) in spec.iter_mut().enumerate().take(n).skip(1) {
        let kk = k.min(n - k) as f64;
        *c *= kk.powf(-beta / 2.0);
    }
    fft::inverse(&mut spec);
    let v = spec.iter().map(|c| c.re / n as f64).collect();
    to_series(normalise(v), rate, format!("power-law noise beta={beta}"))
}

fn normalise(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        v.iter_mut().for_each(|x| *x = (*x - m) / sd);
    }
    v
}

/// One sinusoidal component: `amplitude · sin(2π t / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineComponent {
    /// Seconds.
    pub period: f64,
    pub amplitude: f64,
    /// Radians.
    pub phase: f64,
}

impl SineComponent {
    pub fn new(period: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            period,
            amplitude,
            phase,
        }
    }
}

pub fn gen_sine_mix<T: Real>(components: &[SineComponent], rate: T, n: usize) -> Result<TimeSeries<T>> {
    let fs = rate.to_f64_lossy();
    let limit = 2.0 / fs;
    for c in components {
        if !(c.period > limit) {
            return Err(Error::Nyquist {
                period: c.period,
                limit,
            });
        }
    }
    let v = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            components
                .iter()
                .map(|c| c.amplitude * (2.0 * PI * t / c.period + c.phase).sin())
                .sum()
        })
        .collect();
    to_series(v, rate, "sine mix".into())
}

/// Forcing and dissipation of the impact map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceParams {
    /// Table forcing strength (dimensionless).
    pub amplitude: f64,
    /// Drive frequency in Hz.
    pub drive_freq: f64,
    /// Coefficient of restitution in (0, 1).
    pub restitution: f64,
    pub n_impacts: usize,
    pub seed: u64,
    /// Rate of the rendered series in Hz.
    pub sample_rate: f64,
}

impl Default for BounceParams {
    fn default() -> Self {
        Self {
            amplitude: 6.0,
            drive_freq: 70.0,
            restitution: 0.9,
            n_impacts: 500,
            seed: 0,
            sample_rate: 5000.0,
        }
    }
}

impl BounceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.restitution > 0.0 && self.restitution < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "restitution must lie in (0,1), got {}",
                self.restitution
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("amplitude must be >= 0".into()));
        }
        if !(self.drive_freq > 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        if self.n_impacts == 0 {
            return Err(Error::InvalidParameter("n_impacts must be positive".into()));
        }
        Ok(())
    }

    /// Initial (phase, velocity) drawn from the seed.
    pub fn initial_state(&self) -> (f64, f64) {
        let mut r = rng(self.seed);
        let phase = r.random_range(0.0..2.0 * PI);
        let v = r.random_range(PI..3.0 * PI);
        (phase, v)
    }
}

/// One impact of the high-bounce map.
#[inline]
pub fn bounce_step(amplitude: f64, restitution: f64, (phase, v): (f64, f64)) -> (f64, f64) {
    let next = (phase + v).rem_euclid(2.0 * PI);
    (next, restitution * v - amplitude * next.cos())
}

/// `n_impacts + 1` states of the impact map starting from the seeded state.
pub fn bounce_orbit(p: &BounceParams) -> Result<Vec<(f64, f64)>> {
    p.validate()?;
    let mut state = p.initial_state();
    let mut out = Vec::with_capacity(p.n_impacts + 1);
    out.push(state);
    for _ in 0..p.n_impacts {
        state = bounce_step(p.amplitude, p.restitution, state);
        out.push(state);
    }
    Ok(out)
}

/// Piezo-like rendering of the impact map: a spike of height `|v|` at each
/// impact followed by an exponential ring-down.
pub fn gen_bouncing_ball<T: Real>(p: &BounceParams) -> Result<TimeSeries<T>> {
    let orbit = bounce_orbit(p)?;
    let omega = 2.0 * PI * p.drive_freq;
    let mut times = Vec::with_capacity(orbit.len());
    let mut t = 0.0;
    for &(_, v) in &orbit {
        times.push(t);
        t += v.abs().max(MIN_FLIGHT_PHASE) / omega;
    }
    let tail = 5.0 * IMPACT_RING_DOWN;
    let duration = times.last().copied().unwrap_or(0.0) + tail;
    let n = ((duration * p.sample_rate).ceil() as usize).max(2);
    let mut x = vec![0.0; n];
    let dt = 1.0 / p.sample_rate;
    let ring = (tail / dt).ceil() as usize;
    for (&t_k, &(_, v)) in times.iter().zip(&orbit) {
        let start = (t_k / dt).round() as usize;
        let h = v.abs();
        for (j, slot) in x.iter_mut().skip(start).take(ring + 1).enumerate() {
            let lag = (start + j) as f64 * dt - t_k;
            *slot += h * (-lag.max(0.0) / IMPACT_RING_DOWN).exp();
        }
    }
    to_series(
        x,
        T::c(p.sample_rate),
        format!("bouncing ball A={} r={}", p.amplitude, p.restitution),
    )
}

/// Binomial cascade parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    /// Multiplier in (0.5, 1).
    pub multiplier: f64,
    pub levels: u32,
    pub seed: u64,
}

/// Multiplicative binomial cascade of length `2^levels` with mean one. At
/// every split one child receives the fraction `a` and the other `1-a`; which
/// child gets `a` is drawn from the seed.
pub fn gen_binomial_cascade<T: Real>(p: &CascadeParams, rate: T) -> Result<TimeSeries<T>> {
    let a = p.multiplier;
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "multiplier must lie in (0.5,1), got {a}"
        )));
    }
    if p.levels == 0 || p.levels > 30 {
        return Err(Error::InvalidParameter("levels must lie in 1..=30".into()));
    }
    let mut r = rng(p.seed);
    let mut cur = vec![1.0f64];
    for _ in 0..p.levels {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for &m in &cur {
            if r.random::<bool>() {
                next.extend([m * a, m * (1.0 - a)]);
            } else {
                next.extend([m * (1.0 - a), m * a]);
            }
        }
        cur = next;
    }
    let scale = cur.len() as f64;
    let v = cur.into_iter().map(|m| m * scale).collect();
    to_series(v, rate, format!("binomial cascade a={a}"))
}

/// Generalised Hurst exponent of the binomial cascade,
/// `h(q) = 1/q - ln(a^q + (1-a)^q) / (q ln 2)`, with its `q -> 0` limit.
pub fn cascade_hurst(a: f64, q: f64) -> f64 {
    if q.abs() < 1e-9 {
        // the 1/q poles cancel; what remains is the first-order term
        let b = 1.0 - a;
        return -(a.ln() + b.ln()) / (2.0 * 2f64.ln());
    }
    1.0 / q - (a.powf(q) + (1.0 - a).powf(q)).ln() / (q * 2f64.ln())
}
