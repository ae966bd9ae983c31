//! Largest Lyapunov exponent from a scalar series (Rosenstein's mean log
//! divergence over a delay embedding) and exact exponents of the impact map.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{linear_fit, Real};
use crate::signal::TimeSeries;
use crate::synth::{bounce_step, BounceParams};

pub const DEFAULT_DIMENSION: usize = 5;
/// Autocorrelation level taken as the decorrelation lag.
pub const DELAY_ACF_THRESHOLD: f64 = 0.05;
/// Minimum r² of the detected linear region.
pub const LINEAR_R2: f64 = 0.95;
/// Allowed relative disagreement between the half-window slopes.
pub const HALF_SLOPE_TOLERANCE: f64 = 0.05;
/// FNN fraction above which a warning is attached.
pub const FNN_WARN_FRACTION: f64 = 0.1;
/// Kennel's distance-ratio threshold for a false neighbour.
const FNN_RATIO: f64 = 10.0;
/// Minimum number of reference points with a valid neighbour.
pub const MIN_PAIRS: usize = 20;
/// Neighbours closer than this fraction of the standard deviation are
/// treated as duplicates.
pub const DUPLICATE_REL_DISTANCE: f64 = 1e-9;
const MIN_FIT_POINTS: usize = 4;
const MIN_SERIES: usize = 1000;
const MI_BINS: usize = 16;
/// Burn-in of the map iteration, in impacts.
const MAP_TRANSIENT: usize = 1000;
pub const MIN_MAP_IMPACTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmbeddingConfig {
    pub dimension: usize,
    /// Samples.
    pub delay: usize,
    /// Neighbours closer than this in time are excluded.
    pub theiler_window: usize,
    /// Length of the divergence curve in samples.
    pub max_iter: usize,
    /// Upper bound on evenly spaced reference points; neighbours are still
    /// searched over the whole embedding.
    pub max_reference: usize,
}

impl EmbeddingConfig {
    pub fn new(dimension: usize, delay: usize) -> Self {
        Self {
            dimension,
            delay,
            theiler_window: dimension * delay,
            max_iter: (10 * delay).max(20),
            max_reference: 4000,
        }
    }

    /// Default dimension with the delay from [`estimate_delay`].
    pub fn for_series<T: Real>(x: &TimeSeries<T>) -> Self {
        Self::new(DEFAULT_DIMENSION, estimate_delay(x))
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_theiler(mut self, w: usize) -> Self {
        self.theiler_window = w;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension must be >= 2, got {}",
                self.dimension
            )));
        }
        if self.delay < 1 {
            return Err(Error::InvalidParameter("delay must be >= 1".into()));
        }
        if self.max_iter < MIN_FIT_POINTS {
            return Err(Error::InvalidParameter(format!("max_iter must be >= {MIN_FIT_POINTS}")));
        }
        if self.max_reference == 0 {
            return Err(Error::InvalidParameter("max_reference must be positive".into()));
        }
        if 2 * (self.dimension - 1) * self.delay >= n {
            return Err(Error::InvalidParameter(format!(
                "embedding span (m-1)·τ = {} must be below N/2 = {}",
                (self.dimension - 1) * self.delay,
                n / 2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    /// Per second.
    pub lambda: f64,
    /// Inclusive iteration range of the fit.
    pub fit_range: (usize, usize),
    pub r_squared: f64,
    pub slope_stderr: f64,
    pub config: EmbeddingConfig,
    /// Mean log divergence per iteration (NaN where no pair survives).
    pub divergence: Vec<f64>,
    pub n_pairs: usize,
    pub fnn_fraction: f64,
    pub warnings: Vec<String>,
}

/// Unbiased autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation<T: Real>(x: &[T], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let v: Vec<f64> = x.iter().map(|a| a.to_f64_lossy()).collect();
    let m = v.iter().sum::<f64>() / n as f64;
    let c0 = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / n as f64;
    (0..=max_lag.min(n - 1))
        .map(|k| {
            if c0 <= 0.0 {
                return 0.0;
            }
            let ck = (0..n - k).map(|i| (v[i] - m) * (v[i + k] - m)).sum::<f64>() / (n - k) as f64;
            ck / c0
        })
        .collect()
}

/// First lag whose autocorrelation drops below [`DELAY_ACF_THRESHOLD`]; when
/// none does within `N/4` lags, the first minimum of the mutual information.
pub fn estimate_delay<T: Real>(x: &TimeSeries<T>) -> usize {
    let max_lag = (x.len() / 4).max(1);
    let acf = autocorrelation(x.samples(), max_lag);
    if let Some(k) = (1..acf.len()).find(|&k| acf[k] < DELAY_ACF_THRESHOLD) {
        return k;
    }
    first_mi_minimum(x.samples(), max_lag).unwrap_or(1)
}

/// Histogram estimate of the mutual information between `x[i]` and `x[i+lag]`.
pub fn mutual_information<T: Real>(x: &[T], lag: usize) -> f64 {
    let v: Vec<f64> = x.iter().map(|a| a.to_f64_lossy()).collect();
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    if !(hi > lo) || lag >= v.len() {
        return 0.0;
    }
    let bin = |a: f64| (((a - lo) / (hi - lo) * MI_BINS as f64) as usize).min(MI_BINS - 1);
    let n = v.len() - lag;
    let mut joint = vec![0usize; MI_BINS * MI_BINS];
    let mut pa = [0usize; MI_BINS];
    let mut pb = [0usize; MI_BINS];
    for i in 0..n {
        let (a, b) = (bin(v[i]), bin(v[i + lag]));
        joint[a * MI_BINS + b] += 1;
        pa[a] += 1;
        pb[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..MI_BINS {
        for b in 0..MI_BINS {
            let c = joint[a * MI_BINS + b];
            if c > 0 {
                let pab = c as f64 / nf;
                mi += pab * (pab / (pa[a] as f64 / nf * pb[b] as f64 / nf)).ln();
            }
        }
    }
    mi
}

fn first_mi_minimum<T: Real>(x: &[T], max_lag: usize) -> Option<usize> {
    let mut prev = mutual_information(x, 1);
    for k in 2..=max_lag {
        let cur = mutual_information(x, k);
        if cur > prev {
            return Some(k - 1);
        }
        prev = cur;
    }
    None
}

struct Embedding {
    points: Vec<f64>,
    m: usize,
    len: usize,
}

impl Embedding {
    fn new(x: &[f64], m: usize, tau: usize) -> Self {
        let len = x.len() - (m - 1) * tau;
        let mut points = Vec::with_capacity(len * m);
        for i in 0..len {
            points.extend((0..m).map(|d| x[i + d * tau]));
        }
        Self { points, m, len }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.m..(i + 1) * self.m]
    }

    fn dist2(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Nearest neighbour of `i` among `0..limit` outside the Theiler window,
    /// ignoring points within `floor2` (squared) that are duplicates up to
    /// rounding.
    fn nearest(&self, i: usize, limit: usize, theiler: usize, floor2: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            if j.abs_diff(i) <= theiler {
                continue;
            }
            let d = self.dist2(i, j);
            if d > floor2 && best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        best
    }
}

/// Squared distance below which two embedded points count as duplicates.
fn duplicate_floor2(x: &[f64], m: usize) -> f64 {
    let sd = crate::scalar::variance(x).sqrt();
    let d = DUPLICATE_REL_DISTANCE * sd;
    d * d * m as f64
}

fn reference_points(count: usize, max: usize) -> Vec<usize> {
    if count <= max {
        (0..count).collect()
    } else {
        (0..max).map(|k| k * count / max).collect()
    }
}

/// Largest Lyapunov exponent by Rosenstein's method. The slope of the mean
/// log divergence is fitted over the longest initial window with
/// `r² > 0.95` and divided by the sampling period.
pub fn largest_lyapunov<T: Real>(x: &TimeSeries<T>, cfg: &EmbeddingConfig) -> Result<LyapunovResult> {
    let n = x.len();
    if n < MIN_SERIES {
        return Err(Error::TooShort {
            len: n,
            needed: MIN_SERIES,
        });
    }
    cfg.validate(n)?;
    let v: Vec<f64> = x.samples().iter().map(|a| a.to_f64_lossy()).collect();
    let emb = Embedding::new(&v, cfg.dimension, cfg.delay);
    if emb.len <= cfg.max_iter + 1 {
        return Err(Error::InsufficientNeighbors(format!(
            "embedding of {} points is shorter than the divergence horizon {}",
            emb.len, cfg.max_iter
        )));
    }
    let floor2 = duplicate_floor2(&v, cfg.dimension);
    let limit = emb.len - cfg.max_iter;
    let refs = reference_points(limit, cfg.max_reference);
    let pairs: Vec<(usize, usize)> = refs
        .par_iter()
        .filter_map(|&i| emb.nearest(i, limit, cfg.theiler_window, floor2).map(|(j, _)| (i, j)))
        .collect();
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientNeighbors(format!(
            "only {} reference points have a neighbour outside the Theiler window",
            pairs.len()
        )));
    }

    let divergence: Vec<f64> = (0..=cfg.max_iter)
        .into_par_iter()
        .map(|k| {
            let (sum, count) = pairs.iter().fold((0.0, 0usize), |(s, c), &(i, j)| {
                let d = emb.dist2(i + k, j + k);
                if d > 0.0 {
                    (s + 0.5 * d.ln(), c + 1)
                } else {
                    (s, c)
                }
            });
            if count == 0 {
                f64::NAN
            } else {
                sum / count as f64
            }
        })
        .collect();

    let mut warnings = Vec::new();
    let (k_lo, k_hi, fit) = match linear_region(&divergence) {
        Some(r) => r,
        None => {
            let (lo, hi) = finite_span(&divergence)
                .ok_or_else(|| Error::InsufficientNeighbors("divergence curve has no finite points".into()))?;
            let (ks, ys) = curve_points(&divergence, lo, hi);
            let fit = linear_fit(&ks, &ys)
                .ok_or_else(|| Error::InsufficientNeighbors("divergence curve is degenerate".into()))?;
            warnings.push(format!(
                "no window of the divergence curve reaches r^2 > {LINEAR_R2}; fitted all {} iterations",
                hi - lo + 1
            ));
            (lo, hi, fit)
        }
    };

    let fnn = false_nearest_fraction(&v, cfg.dimension, cfg.delay, cfg.theiler_window, cfg.max_reference);
    if fnn > FNN_WARN_FRACTION {
        warnings.push(format!(
            "false nearest neighbour fraction {:.3} at m = {} exceeds {FNN_WARN_FRACTION}",
            fnn, cfg.dimension
        ));
    }
    let rate = x.sample_rate().to_f64_lossy();
    Ok(LyapunovResult {
        lambda: fit.slope * rate,
        fit_range: (k_lo, k_hi),
        r_squared: fit.r_squared.clamp(0.0, 1.0),
        slope_stderr: fit.slope_stderr * rate,
        config: *cfg,
        divergence,
        n_pairs: pairs.len(),
        fnn_fraction: fnn,
        warnings,
    })
}

fn finite_span(y: &[f64]) -> Option<(usize, usize)> {
    let lo = y.iter().position(|v| v.is_finite())?;
    let hi = y.iter().rposition(|v| v.is_finite())?;
    (hi > lo).then_some((lo, hi))
}

fn curve_points(y: &[f64], lo: usize, hi: usize) -> (Vec<f64>, Vec<f64>) {
    (lo..=hi)
        .filter(|&k| y[k].is_finite())
        .map(|k| (k as f64, y[k]))
        .unzip()
}

/// Longest window starting within the first quarter of the curve whose fit
/// has `r² > LINEAR_R2` and whose halves share a slope; ties go to the
/// earlier start.
fn linear_region(y: &[f64]) -> Option<(usize, usize, crate::scalar::LineFit<f64>)> {
    let last = y.iter().rposition(|v| v.is_finite())?;
    let max_start = (y.len() / 4).max(1);
    let mut best: Option<(usize, usize, crate::scalar::LineFit<f64>)> = None;
    for lo in 0..max_start.min(last) {
        if !y[lo].is_finite() {
            continue;
        }
        for hi in (lo + MIN_FIT_POINTS - 1..=last).rev() {
            if let Some((blo, bhi, _)) = best {
                if hi - lo <= bhi - blo {
                    break;
                }
            }
            let (ks, ys) = curve_points(y, lo, hi);
            if ks.len() < MIN_FIT_POINTS {
                continue;
            }
            if let Some(fit) = linear_fit(&ks, &ys) {
                if fit.r_squared > LINEAR_R2 && halves_agree(&ks, &ys, &fit) {
                    best = Some((lo, hi, fit));
                    break;
                }
            }
        }
    }
    best
}

/// Slopes of the two halves of a window agree, so the window does not bend
/// into the saturation plateau.
fn halves_agree(ks: &[f64], ys: &[f64], fit: &crate::scalar::LineFit<f64>) -> bool {
    let mid = ks.len() / 2;
    let (Some(a), Some(b)) = (linear_fit(&ks[..=mid], &ys[..=mid]), linear_fit(&ks[mid..], &ys[mid..])) else {
        return true;
    };
    let noise = 3.0 * a.slope_stderr.hypot(b.slope_stderr);
    (a.slope - b.slope).abs() <= (HALF_SLOPE_TOLERANCE * fit.slope.abs()).max(noise)
}

/// Fraction of false nearest neighbours at dimension `m` (Kennel's ratio test).
pub fn false_nearest_fraction(x: &[f64], m: usize, tau: usize, theiler: usize, max_reference: usize) -> f64 {
    if x.len() <= m * tau + 1 {
        return 0.0;
    }
    let emb = Embedding::new(&x[..x.len() - tau], m, tau);
    let floor2 = duplicate_floor2(x, m);
    let refs = reference_points(emb.len, max_reference);
    let (false_count, total) = refs
        .par_iter()
        .filter_map(|&i| {
            let (j, d2) = emb.nearest(i, emb.len, theiler, floor2)?;
            let extra = (x[i + m * tau] - x[j + m * tau]).abs();
            Some(usize::from(extra / d2.sqrt() > FNN_RATIO))
        })
        .fold(|| (0usize, 0usize), |(f, t), b| (f + b, t + 1))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total == 0 {
        0.0
    } else {
        false_count as f64 / total as f64
    }
}

/// Both exponents of the impact map per impact, largest first, by QR
/// re-orthonormalisation of the tangent dynamics.
pub fn map_lyapunov_spectrum(p: &BounceParams) -> Result<[f64; 2]> {
    p.validate()?;
    if p.n_impacts < MIN_MAP_IMPACTS {
        return Err(Error::InvalidParameter(format!(
            "map exponents need at least {MIN_MAP_IMPACTS} impacts, got {}",
            p.n_impacts
        )));
    }
    let burn = MAP_TRANSIENT.min(p.n_impacts / 10);
    let mut state = p.initial_state();
    for _ in 0..burn {
        state = bounce_step(p.amplitude, p.restitution, state);
    }
    // columns of the orthonormal frame
    let mut q = [[1.0, 0.0], [0.0, 1.0]];
    let mut sums = [0.0f64; 2];
    let steps = p.n_impacts - burn;
    for _ in 0..steps {
        state = bounce_step(p.amplitude, p.restitution, state);
        let s = p.amplitude * state.0.sin();
        let jac = [[1.0, 1.0], [s, p.restitution + s]];
        let apply = |c: [f64; 2]| [jac[0][0] * c[0] + jac[0][1] * c[1], jac[1][0] * c[0] + jac[1][1] * c[1]];
        let a = apply(q[0]);
        let b = apply(q[1]);
        let r11 = a[0].hypot(a[1]);
        let e1 = [a[0] / r11, a[1] / r11];
        let r12 = e1[0] * b[0] + e1[1] * b[1];
        let w = [b[0] - r12 * e1[0], b[1] - r12 * e1[1]];
        let r22 = w[0].hypot(w[1]);
        sums[0] += r11.ln();
        sums[1] += r22.ln();
        q = [e1, [w[0] / r22, w[1] / r22]];
    }
    let n = steps as f64;
    let mut out = [sums[0] / n, sums[1] / n];
    if out[1] > out[0] {
        out.swap(0, 1);
    }
    Ok(out)
}

/// Largest exponent of the impact map per impact.
pub fn map_lyapunov(p: &BounceParams) -> Result<f64> {
    map_lyapunov_spectrum(p).map(|s| s[0])
}
