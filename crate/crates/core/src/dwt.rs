//! Daubechies discrete wavelet transform: pyramid decomposition, selective
//! reconstruction, denoising and trend removal.
//!
//! Filters are built by spectral factorisation for any number of vanishing
//! moments, so the 4-tap wavelet (two vanishing moments, annihilating
//! constants and straight lines) and the 8-tap wavelet (four moments) come
//! from the same code path.
//!
//! Conventions: the analysis step computes
//! `a[i] = Σ_j lo[j]·x[2i+1-j]` and `d[i] = Σ_j hi[j]·x[2i+1-j]` with
//! `hi[j] = (-1)^j lo[F-1-j]`; synthesis is the transpose. With symmetric
//! (half-sample) extension each level keeps `⌊(n+F-1)/2⌋` coefficients so
//! the inverse is exact on `[0, n)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{Profile, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveletFamily {
    #[default]
    Daubechies,
}

/// Orthogonal wavelet filter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec<T = f64> {
    family: WaveletFamily,
    vanishing_moments: usize,
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Real> WaveletSpec<T> {
    /// Daubechies wavelet with `p` vanishing moments (`2p` taps), `1 <= p <= 10`.
    pub fn daubechies(p: usize) -> Result<Self> {
        if !(1..=10).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "vanishing moments must lie in 1..=10, got {p}"
            )));
        }
        let lo64 = daubechies_lowpass(p);
        let f = lo64.len();
        let hi64: Vec<f64> = (0..f)
            .map(|j| if j % 2 == 0 { lo64[f - 1 - j] } else { -lo64[f - 1 - j] })
            .collect();
        Ok(Self {
            family: WaveletFamily::Daubechies,
            vanishing_moments: p,
            lo: lo64.into_iter().map(T::c).collect(),
            hi: hi64.into_iter().map(T::c).collect(),
        })
    }

    /// The 4-tap Daubechies wavelet: vanishing zeroth and first moments.
    pub fn db4_four_tap() -> Self {
        Self::daubechies(2).expect("p = 2 is supported")
    }

    /// The 8-tap Daubechies wavelet (four vanishing moments).
    pub fn db4_eight_tap() -> Self {
        Self::daubechies(4).expect("p = 4 is supported")
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn lowpass(&self) -> &[T] {
        &self.lo
    }

    pub fn highpass(&self) -> &[T] {
        &self.hi
    }

    /// Number of filter taps.
    pub fn support(&self) -> usize {
        self.lo.len()
    }
}

impl<T: Real> Default for WaveletSpec<T> {
    fn default() -> Self {
        Self::db4_four_tap()
    }
}

/// Low-pass Daubechies filter with `p` vanishing moments, normalised to
/// `Σ h = √2`, in the usual ordering (largest taps first).
fn daubechies_lowpass(p: usize) -> Vec<f64> {
    if p == 1 {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        return vec![c, c];
    }
    // P(y) = Σ_{k<p} C(p-1+k, k) y^k, y = sin²(ω/2)
    let coeffs: Vec<f64> = (0..p).map(|k| binomial(p - 1 + k, k)).collect();
    let y_roots = poly_roots(&coeffs);
    // each y root maps to z + 1/z = 2 - 4y; keep the root inside the unit circle
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..p {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for y in y_roots {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - 4.0).sqrt();
        let z1 = (b + disc) / 2.0;
        let z2 = (b - disc) / 2.0;
        let z = if z1.norm() < 1.0 { z1 } else { z2 };
        poly = poly_mul(&poly, &[-z, Complex64::new(1.0, 0.0)]);
    }
    let mut h: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let s: f64 = h.iter().sum();
    let k = std::f64::consts::SQRT_2 / s;
    h.iter_mut().for_each(|v| *v *= k);
    h.reverse();
    h
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Ascending-power polynomial product.
fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dv = dv * z + v;
        v = v * z + a;
    }
    (v, dv)
}

/// Roots of a real ascending-power polynomial: Durand–Kerner, then Newton polish.
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let (num, _) = poly_eval(&monic, roots[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = num / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let (v, dv) = poly_eval(&monic, *r);
            if dv.norm() == 0.0 {
                break;
            }
            *r -= v / dv;
        }
    }
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Circular wrap; requires lengths divisible by `2^levels`.
    Periodic,
    /// Half-sample symmetric extension; any length.
    #[default]
    Symmetric,
}

/// Multi-level decomposition. `details[0]` is the finest level (j = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DwtDecomposition<T = f64> {
    pub approx: Vec<T>,
    pub details: Vec<Vec<T>>,
    pub boundary: Boundary,
    pub original_length: usize,
    /// Input length at each level, finest first.
    level_lengths: Vec<usize>,
    spec: WaveletSpec<T>,
}

impl<T: Real> DwtDecomposition<T> {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn spec(&self) -> &WaveletSpec<T> {
        &self.spec
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> T {
        let sq = |v: &[T]| v.iter().map(|&c| c * c).sum::<T>();
        sq(&self.approx) + self.details.iter().map(|d| sq(d)).sum::<T>()
    }

    /// `(level, index, value)` rows; level 0 holds the approximation.
    pub fn coefficient_rows(&self) -> Vec<(usize, usize, T)> {
        let mut rows: Vec<(usize, usize, T)> = self.approx.iter().enumerate().map(|(i, &v)| (0, i, v)).collect();
        for (l, d) in self.details.iter().enumerate() {
            rows.extend(d.iter().enumerate().map(|(i, &v)| (l + 1, i, v)));
        }
        rows
    }
}

#[inline]
fn reflect(mut k: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if k < 0 {
            k = -k - 1;
        } else if k >= n {
            k = 2 * n - k - 1;
        } else {
            return k as usize;
        }
    }
}

fn analysis_step<T: Real>(x: &[T], spec: &WaveletSpec<T>, boundary: Boundary) -> (Vec<T>, Vec<T>) {
    let n = x.len();
    let f = spec.support();
    let n_out = match boundary {
        Boundary::Periodic => n / 2,
        Boundary::Symmetric => (n + f - 1) / 2,
    };
    let mut a = vec![T::zero(); n_out];
    let mut d = vec![T::zero(); n_out];
    for i in 0..n_out {
        let mut sa = T::zero();
        let mut sd = T::zero();
        for j in 0..f {
            let k = 2 * i as isize + 1 - j as isize;
            let idx = match boundary {
                Boundary::Periodic => k.rem_euclid(n as isize) as usize,
                Boundary::Symmetric => reflect(k, n),
            };
            sa = sa + spec.lo[j] * x[idx];
            sd = sd + spec.hi[j] * x[idx];
        }
        a[i] = sa;
        d[i] = sd;
    }
    (a, d)
}

fn synthesis_step<T: Real>(a: &[T], d: Option<&[T]>, n: usize, spec: &WaveletSpec<T>, boundary: Boundary) -> Vec<T> {
    let f = spec.support();
    let mut out = vec![T::zero(); n];
    for i in 0..a.len() {
        let ai = a[i];
        let di = d.map_or(T::zero(), |d| d[i]);
        for j in 0..f {
            let k = 2 * i as isize + 1 - j as isize;
            let idx = match boundary {
                Boundary::Periodic => k.rem_euclid(n as isize) as usize,
                Boundary::Symmetric => {
                    if k < 0 || k >= n as isize {
                        continue;
                    }
                    k as usize
                }
            };
            out[idx] = out[idx] + ai * spec.lo[j] + di * spec.hi[j];
        }
    }
    out
}

/// Pyramid decomposition into `levels` detail bands plus one approximation.
pub fn dwt_decompose<T: Real>(
    x: &[T],
    spec: &WaveletSpec<T>,
    levels: usize,
    boundary: Boundary,
) -> Result<DwtDecomposition<T>> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let needed = 1usize
        .checked_shl(levels as u32)
        .ok_or_else(|| Error::InvalidParameter("too many levels".into()))?;
    if x.len() < needed {
        return Err(Error::TooShort { len: x.len(), needed });
    }
    if boundary == Boundary::Periodic && !x.len().is_multiple_of(needed) {
        return Err(Error::InvalidParameter(format!(
            "periodic boundary needs a length divisible by {needed}, got {}",
            x.len()
        )));
    }
    let mut cur = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    let mut level_lengths = Vec::with_capacity(levels);
    for _ in 0..levels {
        level_lengths.push(cur.len());
        let (a, d) = analysis_step(&cur, spec, boundary);
        details.push(d);
        cur = a;
    }
    Ok(DwtDecomposition {
        approx: cur,
        details,
        boundary,
        original_length: x.len(),
        level_lengths,
        spec: spec.clone(),
    })
}

/// Bands kept by a reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keep {
    pub approx: bool,
    /// 1-based detail levels to keep.
    pub details: Vec<usize>,
}

impl Keep {
    pub fn all(levels: usize) -> Self {
        Self {
            approx: true,
            details: (1..=levels).collect(),
        }
    }

    pub fn approx_only() -> Self {
        Self {
            approx: true,
            details: Vec::new(),
        }
    }

    pub fn details_only(levels: usize) -> Self {
        Self {
            approx: false,
            details: (1..=levels).collect(),
        }
    }

    /// Smooth part at level `j` of a `levels`-deep decomposition: the
    /// approximation plus every detail band coarser than `j`.
    pub fn trend_at(j: usize, levels: usize) -> Self {
        Self {
            approx: true,
            details: (j + 1..=levels).collect(),
        }
    }

    fn keeps_level(&self, level: usize) -> bool {
        self.details.contains(&level)
    }
}

/// Inverse transform with the unselected bands zeroed.
pub fn dwt_reconstruct<T: Real>(d: &DwtDecomposition<T>, keep: &Keep) -> Result<Vec<T>> {
    if !keep.approx && keep.details.is_empty() {
        return Err(Error::InvalidParameter("empty band selection".into()));
    }
    if let Some(&bad) = keep.details.iter().find(|&&l| l == 0 || l > d.levels()) {
        return Err(Error::InvalidParameter(format!("no detail level {bad}")));
    }
    let mut cur = if keep.approx {
        d.approx.clone()
    } else {
        vec![T::zero(); d.approx.len()]
    };
    for level in (1..=d.levels()).rev() {
        let n = d.level_lengths[level - 1];
        let det = keep.keeps_level(level).then(|| d.details[level - 1].as_slice());
        cur = synthesis_step(&cur, det, n, &d.spec, d.boundary);
    }
    Ok(cur)
}

/// How `denoise` treats detail bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenoiseRule {
    /// Zero the finest `count` detail levels (`None` means `⌈J/2⌉`).
    KillDetails { count: Option<usize> },
    /// Soft-threshold every detail band at the universal threshold
    /// `σ·sqrt(2 ln N)`, with σ from the finest band's median absolute value.
    SoftThreshold,
}

impl Default for DenoiseRule {
    fn default() -> Self {
        DenoiseRule::KillDetails { count: None }
    }
}

/// Removes high-frequency detail bands, keeping the input length.
pub fn denoise<T: Real>(
    x: &TimeSeries<T>,
    spec: &WaveletSpec<T>,
    levels: usize,
    rule: DenoiseRule,
) -> Result<TimeSeries<T>> {
    let mut d = dwt_decompose(x.samples(), spec, levels, Boundary::Symmetric)?;
    match rule {
        DenoiseRule::KillDetails { count } => {
            let count = count.unwrap_or(levels.div_ceil(2)).min(levels);
            for band in d.details.iter_mut().take(count) {
                band.iter_mut().for_each(|c| *c = T::zero());
            }
        }
        DenoiseRule::SoftThreshold => {
            let mut mags: Vec<T> = d.details[0].iter().map(|c| c.abs()).collect();
            mags.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
            let sigma = mags[mags.len() / 2] / T::c(0.6745);
            let thr = sigma * (T::c(2.0) * T::from_usize_lossy(x.len()).ln()).sqrt();
            for band in d.details.iter_mut() {
                for c in band.iter_mut() {
                    let m = c.abs() - thr;
                    *c = if m > T::zero() { c.signum() * m } else { T::zero() };
                }
            }
        }
    }
    let y = dwt_reconstruct(&d, &Keep::all(levels))?;
    x.map_samples(y)
}

/// Minimum profile length for trend extraction at `level`.
pub fn min_length_for_level<T: Real>(spec: &WaveletSpec<T>, level: usize) -> usize {
    spec.support() << level
}

fn fluctuation_one_way<T: Real>(y: &[T], spec: &WaveletSpec<T>, level: usize, boundary: Boundary) -> Result<Vec<T>> {
    let d = dwt_decompose(y, spec, level, boundary)?;
    let trend = dwt_reconstruct(&d, &Keep::approx_only())?;
    Ok(y.iter().zip(&trend).map(|(&a, &b)| a - b).collect())
}

/// Profile minus its level-`level` trend, averaged over a forward and a
/// time-reversed pass to suppress edge artefacts.
pub fn extract_fluctuation<T: Real>(profile: &Profile<T>, spec: &WaveletSpec<T>, level: usize) -> Result<Vec<T>> {
    extract_fluctuation_with(profile.values(), spec, level, Boundary::Symmetric)
}

pub fn extract_fluctuation_with<T: Real>(
    y: &[T],
    spec: &WaveletSpec<T>,
    level: usize,
    boundary: Boundary,
) -> Result<Vec<T>> {
    let needed = min_length_for_level(spec, level);
    if y.len() < needed {
        return Err(Error::TooShort { len: y.len(), needed });
    }
    let fwd = fluctuation_one_way(y, spec, level, boundary)?;
    let rev_in: Vec<T> = y.iter().rev().copied().collect();
    let mut rev = fluctuation_one_way(&rev_in, spec, level, boundary)?;
    rev.reverse();
    let half = T::c(0.5);
    Ok(fwd.iter().zip(&rev).map(|(&a, &b)| (a + b) * half).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn four_tap_matches_closed_form() {
        let s3 = 3f64.sqrt();
        let k = 4.0 * 2f64.sqrt();
        let expected = [(1.0 + s3) / k, (3.0 + s3) / k, (3.0 - s3) / k, (1.0 - s3) / k];
        let w = WaveletSpec::<f64>::db4_four_tap();
        for (a, b) in w.lowpass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn filters_are_orthonormal_with_vanishing_moments() {
        for p in 1..=10 {
            let w = WaveletSpec::<f64>::daubechies(p).unwrap();
            let h = w.lowpass();
            let g = w.highpass();
            assert_eq!(h.len(), 2 * p);
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12);
            for shift in 0..p {
                let dot: f64 = (0..h.len() - 2 * shift).map(|m| h[m] * h[m + 2 * shift]).sum();
                let want = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "p={p} shift={shift} dot={dot}");
            }
            for k in 0..p {
                let m: f64 = g.iter().enumerate().map(|(j, &c)| c * (j as f64).powi(k as i32)).sum();
                let scale = (2.0 * p as f64).powi(k as i32);
                assert!(m.abs() < 1e-9 * scale, "p={p} moment {k} = {m}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_moments() {
        assert!(WaveletSpec::<f64>::daubechies(0).is_err());
        assert!(WaveletSpec::<f64>::daubechies(11).is_err());
    }

    #[test]
    fn ramp_has_vanishing_interior_details() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let x: Vec<f64> = (0..256).map(|t| 0.37 * t as f64 - 5.0).collect();
        let d = dwt_decompose(&x, &w, 4, Boundary::Symmetric).unwrap();
        let max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (l, band) in d.details.iter().enumerate() {
            // coefficients whose support avoids the extended edges
            let edge = w.support();
            for c in &band[edge..band.len() - edge] {
                assert!(c.abs() < 1e-10 * max, "level {} coefficient {c}", l + 1);
            }
        }
    }

    #[test]
    fn zeros_give_zero_coefficients() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let d = dwt_decompose(&[0.0; 64], &w, 3, Boundary::Symmetric).unwrap();
        assert!(d.coefficient_rows().iter().all(|r| r.2 == 0.0));
    }

    #[test]
    fn perfect_reconstruction_both_boundaries() {
        for p in [1, 2, 4, 6] {
            let w = WaveletSpec::<f64>::daubechies(p).unwrap();
            for (n, seed) in [(256usize, 1u64), (300, 2), (257, 3)] {
                let x = random(n, seed);
                let d = dwt_decompose(&x, &w, 4, Boundary::Symmetric).unwrap();
                let y = dwt_reconstruct(&d, &Keep::all(4)).unwrap();
                assert!(rel_err(&y, &x) < 1e-10, "p={p} n={n}");
            }
            let x = random(512, 9);
            let d = dwt_decompose(&x, &w, 5, Boundary::Periodic).unwrap();
            let y = dwt_reconstruct(&d, &Keep::all(5)).unwrap();
            assert!(rel_err(&y, &x) < 1e-10);
        }
    }

    #[test]
    fn periodic_energy_split() {
        let w = WaveletSpec::<f64>::db4_eight_tap();
        let x = random(1024, 4);
        let d = dwt_decompose(&x, &w, 6, Boundary::Periodic).unwrap();
        let ex: f64 = x.iter().map(|v| v * v).sum();
        assert!((d.energy() - ex).abs() < 1e-9 * ex);
    }

    #[test]
    fn periodic_shift_permutes_coarsest_level() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let j = 3;
        let x = random(256, 5);
        let shift = 1 << j;
        let xs: Vec<f64> = (0..x.len()).map(|i| x[(i + x.len() - shift) % x.len()]).collect();
        let a = dwt_decompose(&x, &w, j, Boundary::Periodic).unwrap();
        let b = dwt_decompose(&xs, &w, j, Boundary::Periodic).unwrap();
        let n = a.approx.len();
        for i in 0..n {
            assert!((b.approx[(i + 1) % n] - a.approx[i]).abs() < 1e-12);
            assert!((b.details[j - 1][(i + 1) % n] - a.details[j - 1][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_requires_divisible_length() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        assert!(dwt_decompose(&random(100, 0), &w, 3, Boundary::Periodic).is_err());
        assert!(matches!(
            dwt_decompose(&random(4, 0), &w, 3, Boundary::Symmetric),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn details_of_constant_vanish() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let x = vec![3.5; 128];
        let d = dwt_decompose(&x, &w, 3, Boundary::Symmetric).unwrap();
        let y = dwt_reconstruct(&d, &Keep::details_only(3)).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn empty_selection_rejected() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let d = dwt_decompose(&random(64, 0), &w, 2, Boundary::Symmetric).unwrap();
        let keep = Keep {
            approx: false,
            details: vec![],
        };
        assert!(dwt_reconstruct(&d, &keep).is_err());
    }

    #[test]
    fn trend_of_ramp_is_the_ramp() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let y: Vec<f64> = (0..1024).map(|t| 2.0 * t as f64 + 1.0).collect();
        let f = extract_fluctuation_with(&y, &w, 4, Boundary::Symmetric).unwrap();
        let max = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lo = y.len() / 10;
        for v in &f[lo..y.len() - lo] {
            assert!(v.abs() < 1e-8 * max);
        }
    }

    #[test]
    fn symmetric_profile_gives_symmetric_fluctuation() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let half = random(256, 8);
        let mut y = half.clone();
        y.extend(half.iter().rev());
        let f = extract_fluctuation_with(&y, &w, 3, Boundary::Symmetric).unwrap();
        let n = f.len();
        for i in 0..n {
            assert!((f[i] - f[n - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn denoise_zeros_is_zeros() {
        let w = WaveletSpec::<f64>::db4_four_tap();
        let x = TimeSeries::new(vec![0.0; 256], 100.0).unwrap();
        for rule in [DenoiseRule::default(), DenoiseRule::SoftThreshold] {
            let y = denoise(&x, &w, 4, rule).unwrap();
            assert!(y.samples().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn f32_reconstruction() {
        let w = WaveletSpec::<f32>::db4_four_tap();
        let x: Vec<f32> = random(128, 1).into_iter().map(|v| v as f32).collect();
        let d = dwt_decompose(&x, &w, 3, Boundary::Symmetric).unwrap();
        let y = dwt_reconstruct(&d, &Keep::all(3)).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
