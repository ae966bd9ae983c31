//! Wavelet-detrended multifractal fluctuation analysis.
//!
//! The profile is detrended at dyadic level `j` by subtracting its
//! wavelet approximation (forward and reversed passes averaged). The residual
//! is cut into `M_s = ⌊N/s⌋` segments from the front and `M_s` from the back,
//! each segment's mean square is `F²(b, s)`, and
//!
//! ```text
//! F_q(s) = [ (1/2M_s) Σ_b F²(b,s)^{q/2} ]^{1/q}      q ≠ 0
//! F_0(s) = exp[ (1/4M_s) Σ_b ln F²(b,s) ]
//! ```
//!
//! The segment length tied to level `j` is `s = support · 2^j`.

use rayon::prelude::*;

use crate::dwt::{extract_fluctuation_with, Boundary, WaveletSpec};
use crate::error::{Error, Result};
use crate::scalar::{linear_fit, Real};
use crate::signal::{profile, Profile, TimeSeries};

/// Fits with r² below this are flagged.
pub const POOR_FIT_R2: f64 = 0.9;
/// Fewest scales a scaling fit accepts.
pub const MIN_FIT_SCALES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct MfdfaConfig<T = f64> {
    pub q_values: Vec<T>,
    /// Requested segment lengths; each is snapped to the nearest dyadic level.
    pub scales: Vec<usize>,
    pub wavelet: WaveletSpec<T>,
    pub min_segments: usize,
    pub boundary: Boundary,
    /// Inclusive range of (actual) scales used for the exponent fits.
    /// `None` selects `[2·support, N/8]`.
    pub fit_range: Option<(usize, usize)>,
}

impl<T: Real> MfdfaConfig<T> {
    /// Defaults for a profile of length `n`: q = -10..=10, the 4-tap
    /// wavelet, and every dyadic level whose segment count stays at or above
    /// `min_segments`.
    pub fn for_length(n: usize) -> Self {
        Self::for_length_with(n, WaveletSpec::default())
    }

    pub fn for_length_with(n: usize, wavelet: WaveletSpec<T>) -> Self {
        let min_segments = 4;
        let support = wavelet.support();
        let scales = (1..usize::BITS as usize - 1)
            .map(|j| support << j)
            .take_while(|&s| s <= n && 2 * (n / s) >= min_segments)
            .collect();
        Self {
            q_values: (-10..=10).map(|q| T::c(q as f64)).collect(),
            scales,
            wavelet,
            min_segments,
            boundary: Boundary::Symmetric,
            fit_range: None,
        }
    }

    pub fn with_q(mut self, q: Vec<T>) -> Self {
        self.q_values = q;
        self
    }

    /// Dyadic level nearest to segment length `s`.
    pub fn level_for_scale(&self, s: usize) -> usize {
        let ratio = s as f64 / self.wavelet.support() as f64;
        (ratio.log2().round().max(1.0)) as usize
    }

    pub fn scale_for_level(&self, level: usize) -> usize {
        self.wavelet.support() << level
    }

    fn validate(&self, n: usize) -> Result<Vec<usize>> {
        if self.q_values.is_empty() {
            return Err(Error::InvalidParameter("no q values".into()));
        }
        if self.min_segments < 4 {
            return Err(Error::InvalidParameter("min_segments must be >= 4".into()));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("scales must be strictly ascending".into()));
        }
        let mut levels: Vec<usize> = self.scales.iter().map(|&s| self.level_for_scale(s)).collect();
        levels.dedup();
        if levels.is_empty() {
            return Err(Error::InvalidParameter("no scales".into()));
        }
        for &l in &levels {
            let s = self.scale_for_level(l);
            if 2 * (n / s) < self.min_segments {
                return Err(Error::TooShort {
                    len: n,
                    needed: s * self.min_segments / 2,
                });
            }
        }
        Ok(levels)
    }
}

/// `F²(b, s)` for `b` over `⌊N/s⌋` front segments followed by as many back
/// segments.
pub fn segment_variance<T: Real>(fluct: &[T], s: usize) -> Result<Vec<T>> {
    if s == 0 {
        return Err(Error::InvalidParameter("segment length must be positive".into()));
    }
    let m = fluct.len() / s;
    if m == 0 {
        return Err(Error::TooShort {
            len: fluct.len(),
            needed: s,
        });
    }
    let ms = |seg: &[T]| seg.iter().map(|&v| v * v).sum::<T>() / T::from_usize_lossy(s);
    let n = fluct.len();
    let front = (0..m).map(|b| ms(&fluct[b * s..(b + 1) * s]));
    let back = (0..m).map(|b| ms(&fluct[n - (b + 1) * s..n - b * s]));
    Ok(front.chain(back).collect())
}

/// q-th order average of segment variances. Returns the value and the
/// number of zero-variance segments dropped (only for `q < 0`).
pub fn q_order_mean<T: Real>(f2: &[T], q: T) -> (T, usize) {
    if q == T::zero() {
        let (sum, count, dropped) = f2.iter().fold((T::zero(), 0usize, 0usize), |(s, c, d), &v| {
            if v > T::zero() {
                (s + v.ln(), c + 1, d)
            } else {
                (s, c, d + 1)
            }
        });
        if count == 0 {
            return (T::zero(), dropped);
        }
        return ((sum / T::from_usize_lossy(count) / T::c(2.0)).exp(), dropped);
    }
    let half_q = q / T::c(2.0);
    // log-sum-exp keeps extreme q finite
    let logs: Vec<T> = f2
        .iter()
        .filter(|&&v| v > T::zero() || q > T::zero())
        .map(|&v| {
            if v > T::zero() {
                half_q * v.ln()
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    let dropped = f2.len() - logs.len();
    if logs.is_empty() {
        return (T::zero(), dropped);
    }
    let max = logs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return (T::zero(), dropped);
    }
    let mean = logs.iter().map(|&l| (l - max).exp()).sum::<T>() / T::from_usize_lossy(logs.len());
    (((max + mean.ln()) / q).exp(), dropped)
}

/// Fluctuation functions over the (q, s) grid with their scaling fits.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationTable<T = f64> {
    pub q: Vec<T>,
    /// Actual segment lengths used.
    pub scales: Vec<usize>,
    pub levels: Vec<usize>,
    /// `f[qi][si]`, strictly positive.
    pub f: Vec<Vec<T>>,
    /// Fitted `h(q)`.
    pub h: Vec<T>,
    pub fit_r2: Vec<T>,
    pub fit_range: (usize, usize),
    pub series_length: usize,
    pub warnings: Vec<String>,
}

impl<T: Real> FluctuationTable<T> {
    pub fn q_index(&self, q: T) -> Option<usize> {
        self.q.iter().position(|&v| (v - q).abs() < T::c(1e-9))
    }

    /// Fitted exponent for a given q, if it is on the grid.
    pub fn h_at(&self, q: T) -> Option<T> {
        self.q_index(q).map(|i| self.h[i])
    }

    fn fit_indices(&self) -> Vec<usize> {
        let (lo, hi) = self.fit_range;
        (0..self.scales.len())
            .filter(|&i| self.scales[i] >= lo && self.scales[i] <= hi)
            .collect()
    }
}

/// Generalised Hurst spectrum summary.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedHurst<T = f64> {
    pub q: Vec<T>,
    pub h: Vec<T>,
    pub r_squared: Vec<T>,
    /// `h(2)`.
    pub hurst: T,
    /// `h(min q) - h(max q)`.
    pub delta_h: T,
    /// q values whose fit r² fell below 0.9.
    pub poor_fit: Vec<T>,
}

fn default_fit_range(support: usize, n: usize) -> (usize, usize) {
    (2 * support, n / 8)
}

/// Computes `F_q(s)` for every configured q and scale, then fits `h(q)`.
pub fn fluctuation_function<T: Real>(profile: &Profile<T>, cfg: &MfdfaConfig<T>) -> Result<FluctuationTable<T>> {
    fluctuation_function_from(profile.values(), cfg)
}

fn fluctuation_function_from<T: Real>(y: &[T], cfg: &MfdfaConfig<T>) -> Result<FluctuationTable<T>> {
    let n = y.len();
    let levels = cfg.validate(n)?;
    let scales: Vec<usize> = levels.iter().map(|&l| cfg.scale_for_level(l)).collect();

    let per_scale: Vec<Result<Vec<T>>> = levels
        .par_iter()
        .zip(scales.par_iter())
        .map(|(&level, &s)| {
            let fl = extract_fluctuation_with(y, &cfg.wavelet, level, cfg.boundary)?;
            segment_variance(&fl, s)
        })
        .collect();
    let per_scale: Vec<Vec<T>> = per_scale.into_iter().collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let mut f = vec![vec![T::zero(); scales.len()]; cfg.q_values.len()];
    for (qi, &q) in cfg.q_values.iter().enumerate() {
        for (si, f2) in per_scale.iter().enumerate() {
            let (v, dropped) = q_order_mean(f2, q);
            if dropped > 0 {
                warnings.push(format!(
                    "q={q}, s={}: {dropped} zero-variance segments excluded",
                    scales[si]
                ));
            }
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "zero variance: F_q(s) vanishes at q={q}, s={}",
                    scales[si]
                )));
            }
            f[qi][si] = v;
        }
    }

    let fit_range = cfg
        .fit_range
        .unwrap_or_else(|| default_fit_range(cfg.wavelet.support(), n));
    let mut table = FluctuationTable {
        q: cfg.q_values.clone(),
        scales,
        levels,
        f,
        h: Vec::new(),
        fit_r2: Vec::new(),
        fit_range,
        series_length: n,
        warnings,
    };
    fit_exponents(&mut table)?;
    Ok(table)
}

fn fit_exponents<T: Real>(table: &mut FluctuationTable<T>) -> Result<()> {
    let idx = table.fit_indices();
    if idx.len() < MIN_FIT_SCALES.min(table.scales.len()).max(2) {
        return Err(Error::InvalidParameter(format!(
            "only {} scales inside the fit range {:?}",
            idx.len(),
            table.fit_range
        )));
    }
    let lx: Vec<T> = idx.iter().map(|&i| T::from_usize_lossy(table.scales[i]).ln()).collect();
    table.h.clear();
    table.fit_r2.clear();
    for row in &table.f {
        let ly: Vec<T> = idx.iter().map(|&i| row[i].ln()).collect();
        let fit = linear_fit(&lx, &ly).expect("distinct scales");
        table.h.push(fit.slope);
        table.fit_r2.push(fit.r_squared);
    }
    Ok(())
}

/// Reads `h(q)`, `H = h(2)` and the multifractal width off a table.
/// Requires at least six scales inside the fit range and q = 2 on the grid.
pub fn generalized_hurst<T: Real>(table: &FluctuationTable<T>) -> Result<GeneralizedHurst<T>> {
    let inside = table.fit_indices().len();
    if inside < MIN_FIT_SCALES {
        return Err(Error::InvalidParameter(format!(
            "{inside} scales inside the fit range, need {MIN_FIT_SCALES}"
        )));
    }
    let hurst = table
        .h_at(T::c(2.0))
        .ok_or_else(|| Error::InvalidParameter("q = 2 is not on the grid".into()))?;
    let (imin, imax) = table.q.iter().enumerate().fold((0, 0), |(lo, hi), (i, &q)| {
        (
            if q < table.q[lo] { i } else { lo },
            if q > table.q[hi] { i } else { hi },
        )
    });
    let poor_fit = table
        .q
        .iter()
        .zip(&table.fit_r2)
        .filter(|(_, &r2)| r2 < T::c(POOR_FIT_R2))
        .map(|(&q, _)| q)
        .collect();
    Ok(GeneralizedHurst {
        q: table.q.clone(),
        h: table.h.clone(),
        r_squared: table.fit_r2.clone(),
        hurst,
        delta_h: table.h[imin] - table.h[imax],
        poor_fit,
    })
}

/// How to read an input series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesKind {
    /// A noise-like signal; its cumulative-sum profile is analysed.
    #[default]
    Noise,
    /// An already-integrated walk (e.g. fractional Brownian motion): the
    /// profile of its increments is analysed, so `h(2)` estimates its Hurst
    /// index directly.
    Walk,
}

/// Profile construction followed by [`fluctuation_function`].
pub fn mfdfa<T: Real>(x: &TimeSeries<T>, cfg: &MfdfaConfig<T>, kind: SeriesKind) -> Result<FluctuationTable<T>> {
    let p = match kind {
        SeriesKind::Noise => profile(x),
        SeriesKind::Walk => Profile::of_walk(x)?,
    };
    fluctuation_function(&p, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_alternating_segments() {
        assert!(segment_variance(&[1.0; 16], 4).unwrap().iter().all(|&v| v == 1.0));
        let alt: Vec<f64> = (0..24).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f2 = segment_variance(&alt, 6).unwrap();
        assert_eq!(f2.len(), 8);
        assert!(f2.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn segment_variance_uses_both_ends() {
        // length 10, s = 4: front [0..4],[4..8]; back [6..10],[2..6]
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let f2 = segment_variance(&x, 4).unwrap();
        let ms = |a: usize| (a..a + 4).map(|i| (i * i) as f64).sum::<f64>() / 4.0;
        assert_eq!(f2, vec![ms(0), ms(4), ms(6), ms(2)]);
    }

    #[test]
    fn too_short_segment_input() {
        assert!(matches!(segment_variance(&[1.0, 2.0], 4), Err(Error::TooShort { .. })));
    }

    #[test]
    fn power_mean_is_monotone_in_q() {
        let f2 = [0.3, 1.2, 0.01, 5.0, 2.2, 0.7];
        let mut prev = 0.0;
        for qi in -20..=20 {
            let q = qi as f64 * 0.5;
            let (v, _) = q_order_mean(&f2, q);
            assert!(v >= prev * (1.0 - 1e-12), "q={q}");
            prev = v;
        }
        let (lo, _) = q_order_mean(&f2, -0.5);
        let (mid, _) = q_order_mean(&f2, 0.0);
        let (hi, _) = q_order_mean(&f2, 0.5);
        assert!(lo <= mid && mid <= hi);
    }

    #[test]
    fn zero_segments_are_dropped_for_negative_q() {
        let (v, dropped) = q_order_mean(&[0.0_f64, 4.0, 4.0], -2.0);
        assert_eq!(dropped, 1);
        assert!((v - 2.0).abs() < 1e-12);
        let (_, dropped) = q_order_mean(&[0.0, 4.0, 4.0], 2.0);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn default_scales_respect_segment_count() {
        let cfg = MfdfaConfig::<f64>::for_length(4096);
        assert_eq!(cfg.scales.first(), Some(&8));
        assert!(cfg.scales.iter().all(|&s| 2 * (4096 / s) >= cfg.min_segments));
        assert_eq!(cfg.q_values.len(), 21);
    }

    #[test]
    fn zero_signal_is_rejected() {
        let x = TimeSeries::new(vec![0.0; 1024], 1.0).unwrap();
        let cfg = MfdfaConfig::for_length(1024);
        assert!(mfdfa(&x, &cfg, SeriesKind::Noise).is_err());
    }
}
