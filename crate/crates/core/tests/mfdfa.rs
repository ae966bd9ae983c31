use proptest::prelude::*;
use wavescope::dwt::WaveletSpec;
use wavescope::mfdfa::*;
use wavescope::signal::profile;
use wavescope::synth::{cascade_hurst, gen_binomial_cascade, gen_fbm, gen_fgn, CascadeParams};
use wavescope::TimeSeries;

mod naive {
    fn reflect(k: isize, n: usize) -> usize {
        let n = n as isize;
        let mut k = k;
        while k < 0 || k >= n {
            k = if k < 0 { -k - 1 } else { 2 * n - k - 1 };
        }
        k as usize
    }

    fn analyse(x: &[f64], lo: &[f64]) -> Vec<f64> {
        let f = lo.len();
        let m = (x.len() + f - 1) / 2;
        let mut a = vec![0.0; m];
        for i in 0..m {
            for j in 0..f {
                a[i] += lo[j] * x[reflect(2 * i as isize + 1 - j as isize, x.len())];
            }
        }
        a
    }

    fn synthesise(a: &[f64], lo: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..a.len() {
            for j in 0..lo.len() {
                let k = 2 * i as isize + 1 - j as isize;
                if k >= 0 && (k as usize) < n {
                    out[k as usize] += a[i] * lo[j];
                }
            }
        }
        out
    }

    fn trend(y: &[f64], lo: &[f64], level: usize) -> Vec<f64> {
        let mut lens = Vec::new();
        let mut cur = y.to_vec();
        for _ in 0..level {
            lens.push(cur.len());
            cur = analyse(&cur, lo);
        }
        for &n in lens.iter().rev() {
            cur = synthesise(&cur, lo, n);
        }
        cur
    }

    fn fluctuation(y: &[f64], lo: &[f64], level: usize) -> Vec<f64> {
        let fwd = trend(y, lo, level);
        let rev_in: Vec<f64> = y.iter().rev().copied().collect();
        let mut rev = trend(&rev_in, lo, level);
        rev.reverse();
        (0..y.len()).map(|i| y[i] - 0.5 * (fwd[i] + rev[i])).collect()
    }

    /// `F_q(s)` by explicit loops over segments and samples.
    pub fn fq(x: &[f64], lo: &[f64], level: usize, q: f64) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut y = vec![0.0; n];
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[i] - mean;
            y[i] = acc;
        }
        let fl = fluctuation(&y, lo, level);
        let s = lo.len() << level;
        let m = n / s;
        let mut f2 = Vec::new();
        for b in 0..m {
            let mut sum = 0.0;
            for i in 0..s {
                sum += fl[b * s + i].powi(2);
            }
            f2.push(sum / s as f64);
        }
        for b in 0..m {
            let mut sum = 0.0;
            for i in 0..s {
                sum += fl[n - (b + 1) * s + i].powi(2);
            }
            f2.push(sum / s as f64);
        }
        if q == 0.0 {
            (f2.iter().map(|v| v.ln()).sum::<f64>() / (2.0 * f2.len() as f64)).exp()
        } else {
            (f2.iter().map(|v| v.powf(q / 2.0)).sum::<f64>() / f2.len() as f64).powf(1.0 / q)
        }
    }
}

#[test]
fn pipeline_matches_naive_double_loop() {
    let n = 4096;
    let x: TimeSeries = gen_fgn(0.6, n, 21, 1.0).unwrap();
    let cfg = MfdfaConfig::for_length(n);
    let table = fluctuation_function(&profile(&x), &cfg).unwrap();
    let lo = WaveletSpec::<f64>::default().lowpass().to_vec();
    for (qi, &q) in table.q.iter().enumerate() {
        for (si, &level) in table.levels.iter().enumerate() {
            let oracle = naive::fq(x.samples(), &lo, level, q);
            let got = table.f[qi][si];
            assert!(
                (got - oracle).abs() <= 1e-9 * oracle,
                "q={q} s={}: {got} vs {oracle}",
                table.scales[si]
            );
        }
    }
}

#[test]
fn eight_tap_pipeline_matches_naive_double_loop() {
    let n = 4096;
    let x: TimeSeries = gen_fgn(0.4, n, 5, 1.0).unwrap();
    let spec = WaveletSpec::db4_eight_tap();
    let cfg = MfdfaConfig::for_length_with(n, spec.clone()).with_q(vec![-3.0, 0.0, 2.0, 4.5]);
    let table = fluctuation_function(&profile(&x), &cfg).unwrap();
    for (qi, &q) in table.q.iter().enumerate() {
        for (si, &level) in table.levels.iter().enumerate() {
            let oracle = naive::fq(x.samples(), spec.lowpass(), level, q);
            assert!((table.f[qi][si] - oracle).abs() <= 1e-9 * oracle);
        }
    }
}

#[test]
fn fbm_hurst_is_recovered() {
    let n = 1 << 14;
    for &h in &[0.3, 0.5, 0.7] {
        for seed in 0..3 {
            let x: TimeSeries = gen_fbm(h, n, seed, 1.0).unwrap();
            let cfg = MfdfaConfig::for_length(n - 1);
            let gh = generalized_hurst(&mfdfa(&x, &cfg, SeriesKind::Walk).unwrap()).unwrap();
            assert!((gh.hurst - h).abs() < 0.1, "H={h} seed={seed}: {}", gh.hurst);
        }
    }
}

#[test]
fn cascade_spectrum_follows_closed_form() {
    let p = CascadeParams {
        multiplier: 0.75,
        levels: 14,
        seed: 0,
    };
    let x: TimeSeries = gen_binomial_cascade(&p, 1.0).unwrap();
    let cfg = MfdfaConfig::for_length(x.len());
    let table = mfdfa(&x, &cfg, SeriesKind::Noise).unwrap();
    for &q in &[-5.0, -2.0, 2.0, 5.0] {
        let h = table.h_at(q).unwrap();
        assert!((h - cascade_hurst(0.75, q)).abs() < 0.1, "q={q}: {h}");
    }
    assert!(generalized_hurst(&table).unwrap().delta_h >= 0.4);
}

#[test]
fn exponents_are_amplitude_invariant() {
    let x: TimeSeries = gen_fgn(0.7, 4096, 8, 1.0).unwrap();
    let scaled = x.map_samples(x.samples().iter().map(|v| v * 13.0).collect()).unwrap();
    let cfg = MfdfaConfig::for_length(4096);
    let a = mfdfa(&x, &cfg, SeriesKind::Noise).unwrap();
    let b = mfdfa(&scaled, &cfg, SeriesKind::Noise).unwrap();
    for qi in 0..a.q.len() {
        assert!((a.h[qi] - b.h[qi]).abs() < 1e-9);
        for si in 0..a.scales.len() {
            assert!((b.f[qi][si] / a.f[qi][si] - 13.0).abs() < 1e-9);
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let x: TimeSeries = gen_fgn(0.5, 4096, 2, 1.0).unwrap();
    let x32 = TimeSeries::<f32>::new(x.samples().iter().map(|&v| v as f32).collect(), 1.0).unwrap();
    let h64 = mfdfa(&x, &MfdfaConfig::for_length(4096), SeriesKind::Noise).unwrap();
    let h32 = mfdfa(&x32, &MfdfaConfig::<f32>::for_length(4096), SeriesKind::Noise).unwrap();
    let i = h64.q_index(2.0).unwrap();
    assert!((h64.h[i] - h32.h[i] as f64).abs() < 1e-3);
}

#[test]
fn short_series_is_rejected() {
    let x = TimeSeries::new((0..20).map(|i| (i as f64).sin()).collect(), 1.0).unwrap();
    assert!(mfdfa(&x, &MfdfaConfig::for_length(20), SeriesKind::Noise).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fq_is_nondecreasing_in_q(seed in 0u64..10_000, h in 0.2f64..0.9) {
        let x: TimeSeries = gen_fgn(h, 2048, seed, 1.0).unwrap();
        let table = mfdfa(&x, &MfdfaConfig::for_length(2048), SeriesKind::Noise).unwrap();
        for si in 0..table.scales.len() {
            for qi in 1..table.q.len() {
                prop_assert!(table.f[qi][si] >= table.f[qi - 1][si] * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn fq_scales_linearly_with_amplitude(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let x: TimeSeries = gen_fgn(0.5, 2048, seed, 1.0).unwrap();
        let y = x.map_samples(x.samples().iter().map(|v| v * c).collect()).unwrap();
        let cfg = MfdfaConfig::for_length(2048).with_q(vec![-4.0, 0.0, 2.0, 6.0]);
        let (a, b) = (
            fluctuation_function(&profile(&x), &cfg).unwrap(),
            fluctuation_function(&profile(&y), &cfg).unwrap(),
        );
        for qi in 0..a.q.len() {
            for si in 0..a.scales.len() {
                prop_assert!((b.f[qi][si] / a.f[qi][si] / c - 1.0).abs() < 1e-9);
            }
        }
    }
}
