use std::f64::consts::PI;

use num_complex::Complex64;
use wavescope::cwt::*;
use wavescope::synth::{gen_fgn, gen_sine_mix, SineComponent};
use wavescope::TimeSeries;

fn tone(period: f64, phase: f64, rate: f64, n: usize) -> TimeSeries {
    gen_sine_mix(&[SineComponent::new(period, 1.0, phase)], rate, n).unwrap()
}

/// Direct time-domain Morlet convolution at one scale, unit-energy norm.
fn direct_morlet(x: &[f64], dt: f64, s: f64, omega0: f64) -> Vec<Complex64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let norm = (dt / s).sqrt() * PI.powf(-0.25);
    (0..n)
        .map(|b| {
            (0..n).fold(Complex64::new(0.0, 0.0), |acc, k| {
                let eta = (k as f64 - b as f64) * dt / s;
                let psi = Complex64::from_polar(norm * (-eta * eta / 2.0).exp(), omega0 * eta);
                acc + psi.conj() * (x[k] - mean)
            })
        })
        .collect()
}

#[test]
fn impulse_matches_direct_convolution_and_localises() {
    let n = 512;
    let rate = 100.0;
    let t0 = 200;
    let mut v = vec![0.0; n];
    v[t0] = 1.0;
    let x = TimeSeries::new(v.clone(), rate).unwrap();
    let scales = [0.04, 0.1, 0.3];
    let sg = cwt_morlet(&x, &scales, 6.0).unwrap();
    for (si, &s) in scales.iter().enumerate() {
        let oracle = direct_morlet(&v, 0.01, s, 6.0);
        let peak = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in sg.coeffs[si].iter().zip(&oracle) {
            assert!((a - b).norm() <= 1e-3 * peak, "scale {s}");
        }
        let argmax = (0..n)
            .max_by(|&a, &b| sg.coeffs[si][a].norm().partial_cmp(&sg.coeffs[si][b].norm()).unwrap())
            .unwrap();
        assert!(argmax.abs_diff(t0) <= 1, "scale {s} peak at {argmax}");
    }
}

#[test]
fn transform_is_linear() {
    let rate = 50.0;
    let x: TimeSeries = gen_fgn(0.6, 1024, 1, rate).unwrap();
    let y: TimeSeries = gen_fgn(0.4, 1024, 2, rate).unwrap();
    let (a, b) = (2.5, -0.75);
    let combo = x
        .map_samples(
            x.samples()
                .iter()
                .zip(y.samples())
                .map(|(p, q)| a * p + b * q)
                .collect(),
        )
        .unwrap();
    let scales = default_scales(1024, 1.0 / rate);
    let sx = cwt_morlet(&x, &scales, 6.0).unwrap();
    let sy = cwt_morlet(&y, &scales, 6.0).unwrap();
    let sc = cwt_morlet(&combo, &scales, 6.0).unwrap();
    let scale = sc.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    for si in 0..scales.len() {
        for ti in 0..1024 {
            let expect = sx.coeffs[si][ti] * a + sy.coeffs[si][ti] * b;
            assert!((sc.coeffs[si][ti] - expect).norm() <= 1e-10 * scale);
        }
    }
}

#[test]
fn periodic_padding_is_shift_covariant() {
    let n = 512;
    let x: TimeSeries = gen_fgn(0.5, n, 4, 1.0).unwrap();
    let k = 37;
    let mut shifted = x.samples().to_vec();
    shifted.rotate_right(k);
    let xs = x.map_samples(shifted).unwrap();
    let cfg = CwtConfig {
        padding: Padding::Periodic,
        ..CwtConfig::default()
    };
    let scales = default_scales(n, 1.0);
    let a = cwt_morlet_with(&x, &scales, &cfg).unwrap();
    let b = cwt_morlet_with(&xs, &scales, &cfg).unwrap();
    for si in 0..scales.len() {
        for ti in 0..n {
            let d = (b.coeffs[si][(ti + k) % n] - a.coeffs[si][ti]).norm();
            assert!(d < 1e-9, "scale {si} time {ti}");
        }
    }
}

#[test]
fn literal_norm_rescales_by_sqrt_dt_over_s() {
    let x = tone(0.2, 0.0, 100.0, 1024);
    let scales = default_scales(1024, 0.01);
    let e = cwt_morlet(&x, &scales, 6.0).unwrap();
    let cfg = CwtConfig {
        norm: CwtNorm::Literal,
        ..CwtConfig::default()
    };
    let l = cwt_morlet_with(&x, &scales, &cfg).unwrap();
    for (si, &s) in scales.iter().enumerate() {
        let f = (0.01 / s).sqrt();
        for ti in (0..1024).step_by(97) {
            assert!((l.coeffs[si][ti] - e.coeffs[si][ti] * f).norm() < 1e-12);
        }
    }
}

#[test]
fn phase_advances_two_pi_per_period() {
    let period = 0.25;
    let rate = 200.0;
    let x = tone(period, 0.4, rate, 4096);
    let sg = cwt_morlet(&x, &scales_for_periods(&[period], 6.0), 6.0).unwrap();
    let ph = phase_at_scale(&sg, sg.scales[0]).unwrap();
    for (ti, c) in sg.coeffs[0].iter().enumerate() {
        assert_eq!(ph.phase[ti], wrap_phase(c.arg()));
        assert_eq!(ph.amplitude[ti], c.norm());
    }
    let idx: Vec<usize> = (0..x.len()).filter(|&i| ph.interior[i]).collect();
    let un = unwrap_phase(&idx.iter().map(|&i| ph.phase[i]).collect::<Vec<_>>());
    let ts: Vec<f64> = idx.iter().map(|&i| ph.times[i]).collect();
    let n = ts.len() as f64;
    let (mt, mp) = (ts.iter().sum::<f64>() / n, un.iter().sum::<f64>() / n);
    let slope = ts.iter().zip(&un).map(|(t, p)| (t - mt) * (p - mp)).sum::<f64>()
        / ts.iter().map(|t| (t - mt) * (t - mt)).sum::<f64>();
    let expected = 2.0 * PI / period;
    assert!((slope - expected).abs() / expected < 0.01, "slope {slope}");
}

#[test]
fn chirp_instantaneous_frequency_is_tracked() {
    let rate = 500.0;
    let n = 8192;
    let (f0, k) = (5.0, 1.5);
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            (2.0 * PI * (f0 * t + 0.5 * k * t * t)).sin()
        })
        .collect();
    let x = TimeSeries::new(v, rate).unwrap();
    let sg = cwt_morlet(&x, &default_scales(n, 1.0 / rate), 6.0).unwrap();
    let dt = 1.0 / rate;
    for ti in (2 * n / 5..3 * n / 5).step_by(50) {
        let ridge = (0..sg.n_scales())
            .max_by(|&a, &b| sg.power(a, ti).partial_cmp(&sg.power(b, ti)).unwrap())
            .unwrap();
        let row = &sg.coeffs[ridge];
        let dphi = (row[ti + 1] * row[ti - 1].conj()).arg() / (2.0 * dt);
        let measured = dphi / (2.0 * PI);
        let expected = f0 + k * ti as f64 * dt;
        assert!(
            (measured - expected).abs() / expected < 0.05,
            "t={} {measured} vs {expected}",
            ti as f64 * dt
        );
    }
}

#[test]
fn identical_signals_synchronise_over_the_interior() {
    let x = tone(0.1, 0.0, 200.0, 2048);
    let sg = cwt_morlet(&x, &scales_for_periods(&[0.1], 6.0), 6.0).unwrap();
    let p = phase_at_scale(&sg, sg.scales[0]).unwrap();
    let d = phase_difference(&p, &p).unwrap();
    assert!(d.delta.iter().all(|&v| v == 0.0));
    assert_eq!(d.segments.len(), 1);
    let first = d.usable.iter().position(|&u| u).unwrap();
    let last = d.usable.iter().rposition(|&u| u).unwrap();
    assert_eq!((d.segments[0].start, d.segments[0].end), (first, last + 1));
}

#[test]
fn quarter_pi_offset_is_measured() {
    let rate = 200.0;
    let a = tone(0.1, PI / 4.0, rate, 4096);
    let b = tone(0.1, 0.0, rate, 4096);
    let scales = scales_for_periods(&[0.1], 6.0);
    let pa = phase_at_scale(&cwt_morlet(&a, &scales, 6.0).unwrap(), scales[0]).unwrap();
    let pb = phase_at_scale(&cwt_morlet(&b, &scales, 6.0).unwrap(), scales[0]).unwrap();
    let d = phase_difference(&pa, &pb).unwrap();
    assert!((d.center - PI / 4.0).abs() < 0.05);
    for i in (0..d.delta.len()).filter(|&i| d.usable[i]) {
        assert!((d.delta[i] - PI / 4.0).abs() < 0.05);
    }
    assert_eq!(d.segments.len(), 1);
    let usable = d.usable.iter().filter(|&&u| u).count();
    assert_eq!(d.segments[0].end - d.segments[0].start, usable);
}

#[test]
fn detuned_pair_has_only_short_segments() {
    let rate = 200.0;
    let f = 10.0;
    let detune = 0.01 * f;
    let n = 12_000;
    let a = tone(1.0 / f, 0.0, rate, n);
    let b = tone(1.0 / (f + detune), 0.0, rate, n);
    let scales = scales_for_periods(&[1.0 / f], 6.0);
    let pa = phase_at_scale(&cwt_morlet(&a, &scales, 6.0).unwrap(), scales[0]).unwrap();
    let pb = phase_at_scale(&cwt_morlet(&b, &scales, 6.0).unwrap(), scales[0]).unwrap();
    let d = phase_difference(&pa, &pb).unwrap();
    let bound = 1.0 / detune;
    assert!(d.segments.iter().all(|s| s.duration() < bound));
    // the difference must actually drift: it spans the full circle
    let usable: Vec<f64> = (0..n).filter(|&i| d.usable[i]).map(|i| d.delta[i]).collect();
    let un = unwrap_phase(&usable);
    let span = un.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - un.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(span > 2.0 * PI);
}

#[test]
fn scale_mismatch_is_rejected() {
    let x = tone(0.1, 0.0, 200.0, 1024);
    let sa = cwt_morlet(&x, &[0.05], 6.0).unwrap();
    let sb = cwt_morlet(&x, &[0.2], 6.0).unwrap();
    let pa = phase_at_scale(&sa, 0.05).unwrap();
    let pb = phase_at_scale(&sb, 0.2).unwrap();
    assert!(phase_difference(&pa, &pb).is_err());
}

#[test]
fn two_tone_mix_gives_two_significant_peaks() {
    let rate = 5000.0;
    let x: TimeSeries = gen_sine_mix(
        &[SineComponent::new(0.578, 1.0, 0.0), SineComponent::new(0.049, 0.7, 0.0)],
        rate,
        1 << 15,
    )
    .unwrap();
    let sg = cwt_morlet(&x, &default_scales(x.len(), 1.0 / rate), 6.0).unwrap();
    let gp = global_power(&sg, Background::White).unwrap();
    let peaks = dominant_periods(&gp, 10);
    let significant: Vec<_> = peaks.iter().filter(|p| p.significant).collect();
    assert_eq!(significant.len(), 2, "{peaks:?}");
    let bin = sg.scale_ratio().ln();
    let mut periods: Vec<f64> = significant.iter().map(|p| p.period).collect();
    periods.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((periods[0] / 0.049).ln().abs() <= bin);
    assert!((periods[1] / 0.578).ln().abs() <= bin);
}

#[test]
fn white_noise_global_power_is_flat_and_calibrated() {
    let n = 1024;
    let seeds = 100;
    let scales = default_scales(n, 1.0);
    let mut mean_power = vec![0.0; scales.len()];
    let mut flagged = 0usize;
    let mut bins = 0usize;
    let mut kept = Vec::new();
    for seed in 0..seeds {
        let x: TimeSeries = gen_fgn(0.5, n, seed, 1.0).unwrap();
        let sg = cwt_morlet(&x, &scales, 6.0).unwrap();
        let gp = global_power(&sg, Background::White).unwrap();
        kept = gp.scales.clone();
        for (i, p) in gp.normalized_power().iter().enumerate() {
            mean_power[i] += p / seeds as f64;
        }
        flagged += (0..gp.len()).filter(|&i| gp.is_significant(i)).count();
        bins += gp.len();
    }
    assert!((flagged as f64) <= 0.1 * bins as f64);
    for (s, p) in kept.iter().zip(&mean_power) {
        if *s >= 3.0 {
            assert!((p - 1.0).abs() <= 0.2, "scale {s}: {p}");
        }
    }
}

#[test]
fn red_background_raises_long_period_threshold() {
    let x: TimeSeries = gen_fgn(0.8, 2048, 9, 1.0).unwrap();
    let sg = cwt_morlet(&x, &default_scales(2048, 1.0), 6.0).unwrap();
    let white = global_power(&sg, Background::White).unwrap();
    let red = global_power(&sg, Background::RedEstimated).unwrap();
    assert!(matches!(red.background, Background::Red(a) if a > 0.0));
    let last = red.len() - 1;
    assert!(red.significance_95[last] > white.significance_95[last]);
    assert!(red.significance_95[0] < white.significance_95[0]);
}

#[test]
fn coi_edges_only_attenuate_tone_power() {
    let n = 2048;
    let x = tone(0.1, 0.0, 200.0, n);
    let sg = cwt_morlet(&x, &scales_for_periods(&[0.1], 6.0), 6.0).unwrap();
    let amp: Vec<f64> = sg.coeffs[0].iter().map(|c| c.norm()).collect();
    let top = amp.iter().cloned().fold(0.0, f64::max);
    // at the cone boundary the Gaussian window loses at most Φ(-√2) ≈ 0.079
    for t in (0..n).filter(|&t| !sg.in_coi(0, t)) {
        assert!(amp[t] >= 0.9 * top, "t={t}");
    }
    // inside the cone the amplitude decays monotonically towards each edge
    let first = (0..n).position(|t| !sg.in_coi(0, t)).unwrap();
    let last = (0..n).rposition(|t| !sg.in_coi(0, t)).unwrap();
    assert!((1..=first).all(|t| amp[t - 1] <= amp[t] * 1.001));
    assert!((last..n - 1).all(|t| amp[t + 1] <= amp[t] * 1.001));
}
