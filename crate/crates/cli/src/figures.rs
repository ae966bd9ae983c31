//! Figure layouts rebuilt on synthetic stand-ins with known ground truth.
//!
//! | figure | stand-in |
//! |--------|----------|
//! | fig7   | fGn, H = 0.7: profile and its Fourier power-law fit |
//! | fig8   | four-tone mix at 5 kHz with white noise: scalogram |
//! | fig9a  | binomial cascade, a = 0.75: F_q(s) per q |
//! | fig9b  | the same cascade: h(q) against the closed form |
//! | fig10a | four-tone mix: time-summed wavelet power with labelled peaks |
//! | fig10b | four-tone mix: normalised power map, cone of influence, 95% outline |
//! | fig11  | locked and 1% detuned sinusoid pairs: phase difference |
//! | fig12  | 1/f^(5/3) and 1/f^7 noise: spectra with Heisenberg guide lines |

use std::f64::consts::PI;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};
use wavescope::cwt::{
    cwt_morlet_with, default_scales, dominant_periods, fourier_factor, global_power, phase_at_scale, phase_difference,
    Background, CwtConfig,
};
use wavescope::mfdfa::{generalized_hurst, mfdfa, MfdfaConfig, SeriesKind};
use wavescope::signal::profile;
use wavescope::spectral::{fit_power_law, heisenberg_fit, hurst_from_alpha, power_spectrum, Window};
use wavescope::synth::{
    cascade_hurst, gen_binomial_cascade, gen_fgn, gen_power_law_noise, gen_sine_mix, CascadeParams, SineComponent,
};
use wavescope::{Error, TimeSeries64};

use crate::artifact::{CsvTable, Output, Sink};
use crate::config::{CwtStage, Formats};
use crate::error::{CliError, EXIT_OK};
use crate::run::{RunReport, StageReport};
use crate::stages::{
    global_power_chart, guide_intercept, log_bins, mfdfa_charts, mfdfa_tables, period_text, phase_chart, power_map,
    refined_period, scalogram,
};
use crate::svg::{Axis, Chart, Series, Style, PALETTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig7,
    Fig8,
    Fig9a,
    Fig9b,
    Fig10a,
    Fig10b,
    Fig11,
    Fig12,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9a,
        Figure::Fig9b,
        Figure::Fig10a,
        Figure::Fig10b,
        Figure::Fig11,
        Figure::Fig12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9a => "fig9a",
            Figure::Fig9b => "fig9b",
            Figure::Fig10a => "fig10a",
            Figure::Fig10b => "fig10b",
            Figure::Fig11 => "fig11",
            Figure::Fig12 => "fig12",
        }
    }
}

/// Periods of the four-tone stand-in, seconds.
pub const TONE_PERIODS: [f64; 4] = [0.018, 0.049, 0.226, 0.578];
/// Amplitudes matching [`TONE_PERIODS`]; 49 ms and 578 ms dominate.
pub const TONE_AMPLITUDES: [f64; 4] = [0.3, 0.8, 0.4, 1.0];
pub const TONE_RATE: f64 = 5000.0;
const FIGURE_SEED: u64 = 7;

pub fn tone_mix(n: usize, noise: f64, seed: u64) -> Result<TimeSeries64, Error> {
    let comps: Vec<SineComponent> = TONE_PERIODS
        .iter()
        .zip(TONE_AMPLITUDES)
        .map(|(&p, a)| SineComponent::new(p, a, 0.0))
        .collect();
    let x = gen_sine_mix(&comps, TONE_RATE, n)?;
    if noise == 0.0 {
        return Ok(x);
    }
    let w = gen_fgn(0.5, n, seed, TONE_RATE)?;
    let v = x
        .samples()
        .iter()
        .zip(w.samples())
        .map(|(a, b)| a + noise * b)
        .collect();
    x.map_samples(v)
}

struct Built {
    files: Vec<Output>,
    summary: Value,
}

/// Computes `fig` and writes its artifacts into `dir`.
pub fn figure_repro(fig: Figure, dir: &Path, formats: Formats) -> RunReport {
    let mut report = RunReport {
        output_dir: dir.to_path_buf(),
        exit_code: EXIT_OK,
        error: None,
        stages: Vec::new(),
        artifacts: Vec::new(),
        failure: None,
    };
    let result = Sink::create(dir, formats).and_then(|mut sink| {
        let built = build(fig).map_err(|e| CliError::stage(fig.name(), e))?;
        for f in &built.files {
            sink.put(f)?;
        }
        sink.put(&Output::json(format!("{}.json", fig.name()), &built.summary))?;
        Ok((sink.into_artifacts(), built.summary))
    });
    match result {
        Ok((artifacts, summary)) => {
            report.artifacts = artifacts;
            report.stages.push(StageReport {
                index: 0,
                stage: fig.name().into(),
                ok: true,
                summary,
            });
        }
        Err(e) => {
            report.exit_code = e.exit_code();
            report.error = Some(e.to_string());
            report.failure = Some(e);
        }
    }
    report
}

fn build(fig: Figure) -> Result<Built, Error> {
    match fig {
        Figure::Fig7 => fig7(),
        Figure::Fig8 => fig8(),
        Figure::Fig9a | Figure::Fig9b => fig9(fig),
        Figure::Fig10a | Figure::Fig10b => fig10(fig),
        Figure::Fig11 => fig11(),
        Figure::Fig12 => fig12(),
    }
}

fn fig7() -> Result<Built, Error> {
    let rate = 1000.0;
    let n = 1 << 14;
    let h = 0.7;
    let x = gen_fgn(h, n, FIGURE_SEED, rate)?;
    let y = x.map_samples(profile(&x).values().to_vec())?;
    let mut prof = CsvTable::new(&["time", "profile"]);
    let pts: Vec<(f64, f64)> = y.samples().iter().enumerate().map(|(i, &v)| (y.time(i), v)).collect();
    for &(t, v) in &pts {
        prof.row(&[t, v]);
    }
    let mut a = Chart::new("Profile (cumulative sum)", Axis::linear("time (s)"), Axis::linear("y"));
    a.legend = false;
    a.push(Series::new("", crate::stages::decimate(&pts), Style::Line, PALETTE[0]));

    let ps = power_spectrum(&y, Window::Hann)?;
    let band = (16.0 * rate / n as f64, 0.1 * rate);
    let fit = fit_power_law(&ps, band)?;
    let alpha = fit.slope.abs();
    let h_fit = hurst_from_alpha(alpha)?;
    let mut spec = CsvTable::new(&["freq", "power"]);
    for (f, p) in ps.freqs.iter().zip(&ps.power) {
        spec.row(&[*f, *p]);
    }
    let raw: Vec<(f64, f64)> = ps.freqs.iter().copied().zip(ps.power.iter().copied()).collect();
    let mut b = Chart::new(
        "Fourier power of the profile",
        Axis::log("frequency (Hz)"),
        Axis::log("power"),
    );
    b.push(Series::new("spectrum", log_bins(&raw, 256), Style::Line, PALETTE[0]));
    let line = [band.0, band.1]
        .iter()
        .map(|&f| (f, 10f64.powf(fit.intercept + fit.slope * f.log10())))
        .collect();
    b.push(Series::new(
        format!("fit: alpha {alpha:.2}, H {h_fit:.2}"),
        line,
        Style::Line,
        PALETTE[1],
    ));
    Ok(Built {
        files: vec![
            Output::csv("fig7a_profile.csv", prof),
            Output::svg("fig7a_profile.svg", a.render()),
            Output::csv("fig7b_spectrum.csv", spec),
            Output::svg("fig7b_spectrum.svg", b.render()),
        ],
        summary: json!({
            "input": { "generator": "fgn", "hurst": h, "n": n, "sample_rate": rate, "seed": FIGURE_SEED },
            "band": band,
            "fit": fit,
            "alpha": alpha,
            "hurst": h_fit,
        }),
    })
}

fn fig8() -> Result<Built, Error> {
    let x = tone_mix(1 << 15, 0.5, FIGURE_SEED)?;
    let sg = scalogram(&x, &CwtStage::default())?;
    let stride = sg.n_times().div_ceil(512);
    let mut t = CsvTable::new(&["scale", "time", "re", "im"]);
    for (si, row) in sg.coeffs.iter().enumerate() {
        for ti in (0..sg.n_times()).step_by(stride) {
            t.row(&[sg.scales[si], sg.times[ti], row[ti].re, row[ti].im]);
        }
    }
    let map = power_map(&sg, Background::White, "Scalogram: wavelet power over time and period")?;
    Ok(Built {
        files: vec![
            Output::csv("fig8_scalogram.csv", t),
            Output::svg("fig8_scalogram.svg", map.render()),
        ],
        summary: json!({
            "input": tone_summary(1 << 15, 0.5),
            "scales": sg.n_scales(),
            "time_stride": stride,
        }),
    })
}

fn tone_summary(n: usize, noise: f64) -> Value {
    json!({
        "generator": "sine_mix",
        "periods": TONE_PERIODS,
        "amplitudes": TONE_AMPLITUDES,
        "sample_rate": TONE_RATE,
        "n": n,
        "noise": noise,
        "seed": FIGURE_SEED,
    })
}

fn fig9(fig: Figure) -> Result<Built, Error> {
    let a = 0.75;
    let p = CascadeParams {
        multiplier: a,
        levels: 14,
        seed: FIGURE_SEED,
    };
    let x = gen_binomial_cascade(&p, 1.0)?;
    let table = mfdfa(&x, &MfdfaConfig::for_length(x.len()), SeriesKind::Noise)?;
    let gh = generalized_hurst(&table)?;
    let (fq, hq) = mfdfa_tables(&table);
    let charts = mfdfa_charts(&table);
    let summary = json!({
        "input": { "generator": "cascade", "multiplier": a, "levels": p.levels, "seed": FIGURE_SEED },
        "fit_range": table.fit_range,
        "hurst": gh.hurst,
        "delta_h": gh.delta_h,
        "h": table.q.iter().zip(&table.h)
            .map(|(&q, &h)| json!({ "q": q, "h": h, "closed_form": cascade_hurst(a, q) }))
            .collect::<Vec<_>>(),
    });
    let files = if fig == Figure::Fig9a {
        vec![
            Output::csv("fig9a_fq.csv", fq),
            Output::svg("fig9a_fq.svg", charts.fq.render()),
        ]
    } else {
        let mut chart = charts.hq;
        let lo = table.q[0];
        let hi = table.q[table.q.len() - 1];
        let exact = (0..=200)
            .map(|k| lo + (hi - lo) * k as f64 / 200.0)
            .map(|q| (q, cascade_hurst(a, q)))
            .collect();
        chart.push(Series::new("closed form", exact, Style::Dashed, PALETTE[1]));
        vec![
            Output::csv("fig9b_hq.csv", hq),
            Output::svg("fig9b_hq.svg", chart.render()),
        ]
    };
    Ok(Built { files, summary })
}

fn fig10(fig: Figure) -> Result<Built, Error> {
    let n = 1 << 16;
    let noise = 0.1;
    let x = tone_mix(n, noise, FIGURE_SEED)?;
    let sg = scalogram(&x, &CwtStage::default())?;
    let gp = global_power(&sg, Background::White)?;
    let peaks = dominant_periods(&gp, 4);
    let mut t = CsvTable::new(&["period", "power", "significance_95"]);
    for i in 0..gp.len() {
        t.row(&[gp.periods[i], gp.power[i], gp.significance_95[i]]);
    }
    let summary = json!({
        "input": tone_summary(n, noise),
        "peaks": peaks,
        "labels": peaks.iter().map(|p| period_text(refined_period(&gp, p.period))).collect::<Vec<_>>(),
    });
    let files = if fig == Figure::Fig10a {
        let mut chart = global_power_chart(&gp, &peaks, "Wavelet power summed over time");
        chart.series.retain(|s| s.label != "95% significance");
        vec![
            Output::csv("fig10a_global_power.csv", t),
            Output::svg("fig10a_global_power.svg", chart.render()),
        ]
    } else {
        let map = power_map(
            &sg,
            Background::White,
            "Normalised wavelet power with cone of influence",
        )?;
        let sig = global_power_chart(&gp, &peaks, "Global wavelet power and 95% significance");
        vec![
            Output::csv("fig10b_global_power.csv", t),
            Output::svg("fig10b_power.svg", map.render()),
            Output::svg("fig10b_global_power.svg", sig.render()),
        ]
    };
    Ok(Built { files, summary })
}

fn fig11() -> Result<Built, Error> {
    let rate = 1000.0;
    let n = 1 << 13;
    let period = 0.049;
    let detune = 1.01;
    let tone = |p: f64, phase: f64| gen_sine_mix(&[SineComponent::new(p, 1.0, phase)], rate, n);
    let reference = tone(period, 0.0)?;
    let cfg = CwtConfig::default();
    let scales = default_scales(n, 1.0 / rate);
    let scale = period / fourier_factor(cfg.omega0);
    let phase_of = |x: &TimeSeries64| cwt_morlet_with(x, &scales, &cfg).and_then(|sg| phase_at_scale(&sg, scale));
    let a = phase_of(&reference)?;
    let locked = phase_difference(&a, &phase_of(&tone(period, -PI / 4.0)?)?)?;
    let drifting = phase_difference(&a, &phase_of(&tone(period * detune, 0.0)?)?)?;
    let mut t = CsvTable::new(&["time", "locked", "detuned", "usable"]);
    for i in 0..a.times.len() {
        t.row(&[
            a.times[i],
            locked.delta[i],
            drifting.delta[i],
            locked.usable[i] as u8 as f64,
        ]);
    }
    let beat = 1.0 / (1.0 / period - 1.0 / (period * detune));
    let longest = drifting.segments.iter().map(|s| s.duration()).fold(0.0, f64::max);
    let summary = json!({
        "input": { "sample_rate": rate, "n": n, "period": period, "offset": PI / 4.0, "detune": detune },
        "locked": { "center": locked.center, "segments": locked.segments },
        "detuned": { "segments": drifting.segments, "longest_segment": longest, "beat_period": beat },
    });
    Ok(Built {
        files: vec![
            Output::csv("fig11_phase_difference.csv", t),
            Output::svg(
                "fig11_locked.svg",
                phase_chart(&a.times, &locked, "Phase difference, equal periods offset by pi/4").render(),
            ),
            Output::svg(
                "fig11_detuned.svg",
                phase_chart(&a.times, &drifting, "Phase difference, periods 1% apart").render(),
            ),
        ],
        summary,
    })
}

fn fig12() -> Result<Built, Error> {
    let rate = 1000.0;
    let n = 1 << 14;
    let band = (8.0 * rate / n as f64, rate / 4.0);
    let mut chart = Chart::new(
        "Power spectra with Heisenberg fits",
        Axis::log("frequency (Hz)"),
        Axis::log("power"),
    );
    let mut table = CsvTable::new(&["freq", "power_turbulence", "power_dissipation"]);
    let mut fits = Vec::new();
    let mut spectra = Vec::new();
    for (k, (beta, name)) in [(5.0 / 3.0, "turbulence"), (7.0, "dissipation")]
        .into_iter()
        .enumerate()
    {
        let x = gen_power_law_noise(beta, n, FIGURE_SEED, rate)?;
        let ps = power_spectrum(&x, Window::None)?;
        let pts: Vec<(f64, f64)> = ps.freqs.iter().copied().zip(ps.power.iter().copied()).collect();
        chart.push(Series::new(
            format!("{name} spectrum"),
            log_bins(&pts, 256),
            Style::Line,
            PALETTE[2 * k],
        ));
        let h = heisenberg_fit(&ps, band, -beta, None)?;
        let icpt = guide_intercept(&ps, band, -beta);
        let guide = [band.0, band.1]
            .iter()
            .map(|&f| (f, 10f64.powf(icpt - beta * f.log10())))
            .collect();
        let label = if k == 0 { "slope -5/3" } else { "slope -7" };
        chart.push(Series::new(label, guide, Style::Dashed, PALETTE[2 * k + 1]));
        fits.push(json!({
            "beta": beta,
            "target_slope": -beta,
            "fitted_slope": h.fit.slope,
            "matches": h.matches,
            "guide_intercept": icpt,
        }));
        spectra.push(ps);
    }
    for i in 0..spectra[0].len() {
        table.row(&[spectra[0].freqs[i], spectra[0].power[i], spectra[1].power[i]]);
    }
    Ok(Built {
        files: vec![
            Output::csv("fig12_spectra.csv", table),
            Output::svg("fig12_heisenberg.svg", chart.render()),
        ],
        summary: json!({
            "input": { "generator": "power_law", "n": n, "sample_rate": rate, "seed": FIGURE_SEED },
            "band": band,
            "fits": fits,
        }),
    })
}
