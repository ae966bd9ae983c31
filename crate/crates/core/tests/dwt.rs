use proptest::prelude::*;
use wavescope::dwt::*;
use wavescope::spectral::{dominant_frequency, power_spectrum, Window};
use wavescope::synth::{gen_fgn, gen_sine_mix, SineComponent};
use wavescope::TimeSeries;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn spec(eight: bool) -> WaveletSpec<f64> {
    if eight {
        WaveletSpec::db4_eight_tap()
    } else {
        WaveletSpec::db4_four_tap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn symmetric_reconstruction_is_perfect(
        x in prop::collection::vec(-1e3f64..1e3, 64..700),
        levels in 1usize..5,
        eight in any::<bool>(),
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        let s = spec(eight);
        let d = dwt_decompose(&x, &s, levels, Boundary::Symmetric).unwrap();
        let y = dwt_reconstruct(&d, &Keep::all(levels)).unwrap();
        prop_assert!(rel_err(&y, &x) <= 1e-10);
    }

    #[test]
    fn periodic_reconstruction_preserves_energy(
        raw in prop::collection::vec(-1e3f64..1e3, 32..640),
        levels in 1usize..4,
        eight in any::<bool>(),
    ) {
        let n = raw.len() >> levels << levels;
        let x = &raw[..n];
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        let s = spec(eight);
        let d = dwt_decompose(x, &s, levels, Boundary::Periodic).unwrap();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((d.energy() - energy).abs() <= 1e-10 * energy);
        let y = dwt_reconstruct(&d, &Keep::all(levels)).unwrap();
        prop_assert!(rel_err(&y, x) <= 1e-10);
    }

    #[test]
    fn bands_sum_to_the_signal(seed in 0u64..1000, levels in 1usize..5) {
        let x: TimeSeries = gen_fgn(0.7, 512, seed, 1.0).unwrap();
        let s = WaveletSpec::default();
        let d = dwt_decompose(x.samples(), &s, levels, Boundary::Symmetric).unwrap();
        let mut sum = dwt_reconstruct(&d, &Keep::approx_only()).unwrap();
        for l in 1..=levels {
            let band = dwt_reconstruct(&d, &Keep { approx: false, details: vec![l] }).unwrap();
            sum.iter_mut().zip(&band).for_each(|(a, b)| *a += b);
        }
        prop_assert!(rel_err(&sum, x.samples()) <= 1e-10);
    }

    #[test]
    fn ramp_interior_details_vanish(a in -50.0f64..50.0, b in -50.0f64..50.0, n in 64usize..512) {
        prop_assume!(a.abs() > 1e-3);
        let x: Vec<f64> = (0..n).map(|i| a * i as f64 + b).collect();
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = WaveletSpec::default();
        let d = dwt_decompose(&x, &s, 3, Boundary::Symmetric).unwrap();
        for band in &d.details {
            let edge = s.support();
            if band.len() > 2 * edge {
                for &c in &band[edge..band.len() - edge] {
                    prop_assert!(c.abs() <= 1e-10 * peak);
                }
            }
        }
    }
}

#[test]
fn denoising_keeps_the_dominant_peak_at_zero_db() {
    let rate = 1000.0;
    let n = 4096;
    for seed in 0..10 {
        let clean: TimeSeries = gen_sine_mix(&[SineComponent::new(0.05, 2f64.sqrt(), 0.0)], rate, n).unwrap();
        // unit-variance noise against a unit-power tone: 0 dB
        let noise: TimeSeries = gen_fgn(0.5, n, seed, rate).unwrap();
        let noisy = clean
            .map_samples(
                clean
                    .samples()
                    .iter()
                    .zip(noise.samples())
                    .map(|(a, b)| a + b)
                    .collect(),
            )
            .unwrap();
        let den = denoise(&noisy, &WaveletSpec::default(), 5, DenoiseRule::default()).unwrap();
        let before = power_spectrum(&clean, Window::Hann).unwrap();
        let after = power_spectrum(&den, Window::Hann).unwrap();
        let f0 = dominant_frequency(&before, true).unwrap();
        let f1 = dominant_frequency(&after, true).unwrap();
        assert!((f0 - f1).abs() <= before.df(), "seed {seed}: {f0} vs {f1}");
    }
}

#[test]
fn soft_threshold_reduces_noise() {
    let rate = 1000.0;
    let n = 4096;
    let clean: TimeSeries = gen_sine_mix(&[SineComponent::new(0.1, 1.0, 0.0)], rate, n).unwrap();
    let noise: TimeSeries = gen_fgn(0.5, n, 3, rate).unwrap();
    let noisy = clean
        .map_samples(
            clean
                .samples()
                .iter()
                .zip(noise.samples())
                .map(|(a, b)| a + 0.3 * b)
                .collect(),
        )
        .unwrap();
    let den = denoise(&noisy, &WaveletSpec::default(), 5, DenoiseRule::SoftThreshold).unwrap();
    assert!(rel_err(den.samples(), clean.samples()) < rel_err(noisy.samples(), clean.samples()));
}
