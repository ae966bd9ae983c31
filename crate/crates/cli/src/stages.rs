//! Input loading and the analysis behind each pipeline stage.
//!
//! Every stage builds its complete output in memory before anything is
//! written, so a failure never leaves half a stage on disk.

use serde_json::{json, Value};
use wavescope::cwt::{
    cwt_morlet_with, default_scales, dominant_periods, fourier_factor, global_power_with, phase_at_scale,
    phase_difference, Background, CwtConfig, CwtNorm, Dof, Padding, PhaseSeries, Scalogram,
};
use wavescope::dwt::{denoise, dwt_decompose, Boundary, DenoiseRule, WaveletSpec};
use wavescope::lyapunov::{autocorrelation, estimate_delay, largest_lyapunov, EmbeddingConfig};
use wavescope::mfdfa::{generalized_hurst, mfdfa, MfdfaConfig, SeriesKind};
use wavescope::signal::{load_csv_with, CsvLayout};
use wavescope::spectral::{
    dominant_frequency, fit_power_law, fractal_dimension, heisenberg_fit, hurst_from_alpha, power_spectrum,
    PowerSpectrum, Window,
};
use wavescope::synth::{
    gen_binomial_cascade, gen_bouncing_ball, gen_fbm, gen_fgn, gen_power_law_noise, gen_sine_mix, BounceParams,
    CascadeParams, SineComponent,
};
use wavescope::{Error, TimeSeries64};

use crate::artifact::{CsvTable, Output};
use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::svg::{Axis, Chart, HeatMap, Label, Series, Style, PALETTE};

/// Points kept when a long curve is drawn.
const PLOT_POINTS: usize = 4000;
/// Log-spaced bins used to draw spectra.
const SPECTRUM_BINS: usize = 256;
/// Scalogram columns kept in the CSV dump by default.
const SCALOGRAM_COLUMNS: usize = 1024;

pub struct StageOutput {
    pub files: Vec<Output>,
    pub summary: Value,
    /// Replacement series for the stages that follow.
    pub series: Option<TimeSeries64>,
}

/// Loads or synthesises the series described by `spec`.
pub fn load_input(spec: &InputSpec, seed: u64) -> CliResult<TimeSeries64> {
    let seed = spec.seed.unwrap_or(seed);
    let at = |e: Error| CliError::stage("input", e);
    if let Some(c) = &spec.csv {
        let layout = CsvLayout {
            column: c.column,
            time_column: c.time_column,
            header: c.header,
        };
        return load_csv_with(&c.path, spec.sample_rate, &layout).map_err(|e| match e {
            Error::Io(m) => CliError::io(&c.path, m),
            e => at(e),
        });
    }
    let rate = spec
        .sample_rate
        .ok_or_else(|| CliError::Config("input: sample_rate is required".into()))?;
    let synth = spec
        .synth
        .as_ref()
        .ok_or_else(|| CliError::Config("input: one of `csv` or `synth` is required".into()))?;
    let x = match synth {
        SynthSpec::Fbm { hurst, n } => gen_fbm(*hurst, *n, seed, rate),
        SynthSpec::Fgn { hurst, n } => gen_fgn(*hurst, *n, seed, rate),
        SynthSpec::PowerLaw { beta, n } => gen_power_law_noise(*beta, *n, seed, rate),
        SynthSpec::SineMix { n, components, noise } => {
            let comps: Vec<SineComponent> = components
                .iter()
                .map(|c| SineComponent::new(c.period, c.amplitude, c.phase))
                .collect();
            gen_sine_mix(&comps, rate, *n).and_then(|x| {
                if *noise == 0.0 {
                    return Ok(x);
                }
                let w = gen_fgn(0.5, *n, seed, rate)?;
                let v = x
                    .samples()
                    .iter()
                    .zip(w.samples())
                    .map(|(a, b)| a + noise * b)
                    .collect();
                x.map_samples(v)
            })
        }
        SynthSpec::BouncingBall {
            amplitude,
            restitution,
            drive_freq,
            n_impacts,
        } => gen_bouncing_ball(&BounceParams {
            amplitude: *amplitude,
            drive_freq: *drive_freq,
            restitution: *restitution,
            n_impacts: *n_impacts,
            seed,
            sample_rate: rate,
        }),
        SynthSpec::Cascade { multiplier, levels } => gen_binomial_cascade(
            &CascadeParams {
                multiplier: *multiplier,
                levels: *levels,
                seed,
            },
            rate,
        ),
    };
    x.map_err(at)
}

/// Files describing the loaded input.
pub fn describe_input(x: &TimeSeries64, stem: &str) -> StageOutput {
    let mut t = CsvTable::new(&["time", "value"]);
    for (i, &v) in x.samples().iter().enumerate() {
        t.row(&[x.time(i), v]);
    }
    let n = x.len() as f64;
    let mean = x.mean();
    let sd = (x.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut chart = Chart::new("Input series", Axis::linear("time (s)"), Axis::linear("value"));
    chart.legend = false;
    chart.push(Series::new("", decimate(&timed(x)), Style::Line, PALETTE[0]));
    StageOutput {
        files: vec![
            Output::csv(format!("{stem}.csv"), t),
            Output::svg(format!("{stem}.svg"), chart.render()),
        ],
        summary: json!({
            "label": x.label(),
            "length": x.len(),
            "sample_rate": x.sample_rate(),
            "mean": mean,
            "std": sd,
        }),
        series: None,
    }
}

pub struct Context {
    pub seed: u64,
    /// Sample rate of the main input, inherited by secondary inputs.
    pub sample_rate: Option<f64>,
}

pub fn execute(stage: &StageSpec, x: &TimeSeries64, stem: &str, ctx: &Context) -> CliResult<StageOutput> {
    let name = stage.name();
    let lib = |e: Error| CliError::stage(name, e);
    match stage {
        StageSpec::Denoise(s) => run_denoise(s, x, stem).map_err(lib),
        StageSpec::Spectrum(s) => run_spectrum(s, x, stem).map_err(lib),
        StageSpec::Fit(s) => run_fit(s, x, stem).map_err(lib),
        StageSpec::Heisenberg(s) => run_heisenberg(s, x, stem).map_err(lib),
        StageSpec::Mfdfa(s) => run_mfdfa(s, x, stem).map_err(lib),
        StageSpec::Cwt(s) => run_cwt(s, x, stem, true).map_err(lib),
        StageSpec::GlobalPower(s) => run_cwt(s, x, stem, false).map_err(lib),
        StageSpec::Phase(s) => run_phase(s, x, stem, ctx),
        StageSpec::Lyapunov(s) => run_lyapunov(s, x, stem).map_err(lib),
    }
}

fn wavelet(taps: usize) -> Result<WaveletSpec<f64>, Error> {
    match taps {
        4 => Ok(WaveletSpec::db4_four_tap()),
        8 => Ok(WaveletSpec::db4_eight_tap()),
        t => Err(Error::InvalidParameter(format!("taps must be 4 or 8, got {t}"))),
    }
}

fn window(w: WindowName) -> Window {
    match w {
        WindowName::None => Window::None,
        WindowName::Hann => Window::Hann,
    }
}

fn timed(x: &TimeSeries64) -> Vec<(f64, f64)> {
    x.samples().iter().enumerate().map(|(i, &v)| (x.time(i), v)).collect()
}

/// Every k-th point so that at most [`PLOT_POINTS`] remain.
pub fn decimate(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let k = points.len().div_ceil(PLOT_POINTS).max(1);
    points.iter().step_by(k).copied().collect()
}

/// Geometric means over log-spaced x bins, for drawing dense spectra.
pub fn log_bins(points: &[(f64, f64)], bins: usize) -> Vec<(f64, f64)> {
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0 && p.1 > 0.0).collect();
    if pos.len() <= bins {
        return pos;
    }
    let lo = pos[0].0.ln();
    let hi = pos[pos.len() - 1].0.ln();
    let width = (hi - lo) / bins as f64;
    let mut out = Vec::new();
    let mut acc = (0.0, 0.0, 0usize);
    let mut current = 0usize;
    for &(f, p) in &pos {
        let b = (((f.ln() - lo) / width) as usize).min(bins - 1);
        if b != current && acc.2 > 0 {
            out.push(((acc.0 / acc.2 as f64).exp(), (acc.1 / acc.2 as f64).exp()));
            acc = (0.0, 0.0, 0);
        }
        current = b;
        acc = (acc.0 + f.ln(), acc.1 + p.ln(), acc.2 + 1);
    }
    if acc.2 > 0 {
        out.push(((acc.0 / acc.2 as f64).exp(), (acc.1 / acc.2 as f64).exp()));
    }
    out
}

/// First lag at which the autocorrelation reaches zero.
pub fn first_acf_zero(x: &TimeSeries64) -> usize {
    let acf = autocorrelation(x.samples(), x.len() / 2);
    acf.iter()
        .skip(1)
        .position(|&r| r <= 0.0)
        .map(|k| k + 1)
        .unwrap_or_else(|| estimate_delay(x))
}

fn run_denoise(s: &DenoiseStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let spec = wavelet(s.taps)?;
    let rule = match s.rule {
        RuleName::Kill => DenoiseRule::KillDetails { count: s.kill_count },
        RuleName::Soft => DenoiseRule::SoftThreshold,
    };
    let y = denoise(x, &spec, s.levels, rule)?;
    let d = dwt_decompose(x.samples(), &spec, s.levels, Boundary::Symmetric)?;
    let mut coeffs = CsvTable::new(&["level", "index", "value"]);
    for (level, index, v) in d.coefficient_rows() {
        coeffs.row(&[level as f64, index as f64, v]);
    }
    let mut series = CsvTable::new(&["time", "raw", "denoised"]);
    for (i, (a, b)) in x.samples().iter().zip(y.samples()).enumerate() {
        series.row(&[x.time(i), *a, *b]);
    }
    let delay = s.embed_delay.unwrap_or_else(|| first_acf_zero(&y));
    if delay >= y.len() {
        return Err(Error::InvalidParameter(format!(
            "embed_delay {delay} exceeds the series length {}",
            y.len()
        )));
    }
    let mut phase = CsvTable::new(&["x", "x_delayed"]);
    let orbit: Vec<(f64, f64)> = y
        .samples()
        .iter()
        .zip(&y.samples()[delay..])
        .map(|(&a, &b)| (a, b))
        .collect();
    for &(a, b) in &orbit {
        phase.row(&[a, b]);
    }
    let residual = x
        .samples()
        .iter()
        .zip(y.samples())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>();
    let energy = x.samples().iter().map(|v| v * v).sum::<f64>();

    let mut traces = Chart::new(
        "Raw and denoised series",
        Axis::linear("time (s)"),
        Axis::linear("value"),
    );
    traces.push(Series::new("raw", decimate(&timed(x)), Style::Line, "#999999"));
    traces.push(Series::new("denoised", decimate(&timed(&y)), Style::Line, PALETTE[1]));
    let mut portrait = Chart::new(
        format!("Phase space of the denoised series, delay {delay}"),
        Axis::linear("x(t)"),
        Axis::linear("x(t + delay)"),
    );
    portrait.legend = false;
    portrait.push(Series::new("", decimate(&orbit), Style::Line, PALETTE[0]));

    Ok(StageOutput {
        files: vec![
            Output::csv(format!("{stem}_series.csv"), series),
            Output::csv(format!("{stem}_coefficients.csv"), coeffs),
            Output::csv(format!("{stem}_phase_space.csv"), phase),
            Output::svg(format!("{stem}_series.svg"), traces.render()),
            Output::svg(format!("{stem}_phase_space.svg"), portrait.render()),
        ],
        summary: json!({
            "levels": s.levels,
            "taps": s.taps,
            "rule": s.rule,
            "embed_delay": delay,
            "residual_rms": (residual / x.len() as f64).sqrt(),
            "residual_energy_fraction": if energy > 0.0 { residual / energy } else { 0.0 },
        }),
        series: Some(y),
    })
}

fn spectrum_table(ps: &PowerSpectrum<f64>) -> CsvTable {
    let mut t = CsvTable::new(&["freq", "power"]);
    for (f, p) in ps.freqs.iter().zip(&ps.power) {
        t.row(&[*f, *p]);
    }
    t
}

fn spectrum_chart(title: &str, ps: &PowerSpectrum<f64>) -> Chart {
    let pts: Vec<(f64, f64)> = ps.freqs.iter().copied().zip(ps.power.iter().copied()).collect();
    let mut c = Chart::new(title, Axis::log("frequency (Hz)"), Axis::log("power"));
    c.push(Series::new(
        "spectrum",
        log_bins(&pts, SPECTRUM_BINS),
        Style::Line,
        PALETTE[0],
    ));
    c
}

/// Straight line of slope `slope` in log-log space through `intercept` at 1 Hz.
fn power_line(band: (f64, f64), slope: f64, intercept: f64) -> Vec<(f64, f64)> {
    [band.0, band.1]
        .iter()
        .map(|&f| (f, 10f64.powf(intercept + slope * f.log10())))
        .collect()
}

fn run_spectrum(s: &SpectrumStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let ps = power_spectrum(x, window(s.window))?;
    let chart = spectrum_chart("Power spectrum", &ps);
    Ok(StageOutput {
        summary: json!({
            "bins": ps.len(),
            "df": ps.df(),
            "window": ps.window,
            "dominant_frequency": dominant_frequency(&ps, true)?,
        }),
        files: vec![
            Output::csv(format!("{stem}.csv"), spectrum_table(&ps)),
            Output::svg(format!("{stem}.svg"), chart.render()),
        ],
        series: None,
    })
}

fn or_reason(r: Result<f64, Error>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "undefined": e.to_string() }),
    }
}

fn run_fit(s: &FitStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let ps = power_spectrum(x, window(s.window))?;
    let band = (s.band[0], s.band[1]);
    let fit = fit_power_law(&ps, band)?;
    let alpha = fit.slope.abs();
    let summary = json!({
        "fit": fit,
        "alpha": alpha,
        "hurst": or_reason(hurst_from_alpha(alpha)),
        "fractal_dimension": or_reason(fractal_dimension(alpha)),
    });
    let mut chart = spectrum_chart("Power-law fit", &ps);
    chart.push(Series::new(
        format!("slope {:.3}", fit.slope),
        power_line(band, fit.slope, fit.intercept),
        Style::Line,
        PALETTE[1],
    ));
    Ok(StageOutput {
        files: vec![
            Output::csv(format!("{stem}_spectrum.csv"), spectrum_table(&ps)),
            Output::json(format!("{stem}.json"), &summary),
            Output::svg(format!("{stem}.svg"), chart.render()),
        ],
        summary,
        series: None,
    })
}

/// Intercept at 1 Hz of the least-squares line with fixed `slope` over the
/// bins inside `band`.
pub fn guide_intercept(ps: &PowerSpectrum<f64>, band: (f64, f64), slope: f64) -> f64 {
    let (sum, n) = ps
        .freqs
        .iter()
        .zip(&ps.power)
        .filter(|(&f, &p)| f >= band.0 && f <= band.1 && p > 0.0)
        .fold((0.0, 0usize), |(s, n), (f, p)| {
            (s + p.log10() - slope * f.log10(), n + 1)
        });
    sum / n.max(1) as f64
}

fn run_heisenberg(s: &HeisenbergStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let ps = power_spectrum(x, window(s.window))?;
    let band = (s.band[0], s.band[1]);
    let mut chart = spectrum_chart("Heisenberg fits", &ps);
    let mut fits = Vec::new();
    for (k, &target) in s.targets.iter().enumerate() {
        let h = heisenberg_fit(&ps, band, target, s.tolerance)?;
        let icpt = guide_intercept(&ps, band, target);
        chart.push(Series::new(
            format!("slope {:.3}{}", target, if h.matches { " (match)" } else { "" }),
            power_line(band, target, icpt),
            Style::Dashed,
            PALETTE[(k + 1) % PALETTE.len()],
        ));
        fits.push(json!({
            "target_slope": h.target_slope,
            "tolerance": h.tolerance,
            "matches": h.matches,
            "guide_intercept": icpt,
            "fit": h.fit,
        }));
    }
    let summary = json!({ "band": band, "fits": fits });
    Ok(StageOutput {
        files: vec![
            Output::csv(format!("{stem}_spectrum.csv"), spectrum_table(&ps)),
            Output::json(format!("{stem}.json"), &summary),
            Output::svg(format!("{stem}.svg"), chart.render()),
        ],
        summary,
        series: None,
    })
}

pub struct MfdfaArtifacts {
    pub fq: Chart,
    pub hq: Chart,
}

/// Log F vs log s per q and h(q) vs q.
pub fn mfdfa_charts(table: &wavescope::FluctuationTable64) -> MfdfaArtifacts {
    let mut fq = Chart::new(
        "Fluctuation function",
        Axis::log("segment length s (samples)"),
        Axis::log("F_q(s)"),
    );
    let nq = table.q.len();
    for (qi, &q) in table.q.iter().enumerate() {
        let named = nq <= 8 || qi == 0 || qi + 1 == nq || q == 2.0;
        let pts = table
            .scales
            .iter()
            .map(|&s| s as f64)
            .zip(table.f[qi].iter().copied())
            .collect();
        let label = if named { format!("q = {q}") } else { String::new() };
        fq.push(Series::new(label, pts, Style::Line, PALETTE[qi % PALETTE.len()]));
    }
    let mut hq = Chart::new("Generalised Hurst exponent", Axis::linear("q"), Axis::linear("h(q)"));
    let pts: Vec<(f64, f64)> = table.q.iter().copied().zip(table.h.iter().copied()).collect();
    hq.push(Series::new("h(q)", pts.clone(), Style::Line, PALETTE[0]));
    hq.push(Series::new("", pts, Style::Points, PALETTE[0]));
    MfdfaArtifacts { fq, hq }
}

pub fn mfdfa_tables(table: &wavescope::FluctuationTable64) -> (CsvTable, CsvTable) {
    let mut fq = CsvTable::new(&["q", "s", "F"]);
    let mut hq = CsvTable::new(&["q", "h", "r2"]);
    for (qi, &q) in table.q.iter().enumerate() {
        for (si, &s) in table.scales.iter().enumerate() {
            fq.row(&[q, s as f64, table.f[qi][si]]);
        }
        hq.row(&[q, table.h[qi], table.fit_r2[qi]]);
    }
    (fq, hq)
}

fn run_mfdfa(s: &MfdfaStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let spec = wavelet(s.taps)?;
    let (kind, n) = match s.series {
        SeriesName::Noise => (SeriesKind::Noise, x.len()),
        SeriesName::Walk => (SeriesKind::Walk, x.len().saturating_sub(1)),
    };
    let mut cfg = MfdfaConfig::for_length_with(n, spec);
    if let Some(q) = &s.q {
        cfg = cfg.with_q(q.clone());
    }
    if let Some(r) = &s.fit_range {
        cfg.fit_range = Some((r[0], r[1]));
    }
    let table = mfdfa(x, &cfg, kind)?;
    let gh = generalized_hurst(&table)?;
    let (fq_csv, hq_csv) = mfdfa_tables(&table);
    let charts = mfdfa_charts(&table);
    let summary = json!({
        "hurst": gh.hurst,
        "delta_h": gh.delta_h,
        "poor_fit_q": gh.poor_fit,
        "fit_range": table.fit_range,
        "series_length": table.series_length,
        "series": s.series,
        "taps": s.taps,
        "warnings": table.warnings,
        "h": table.q.iter().zip(&table.h).zip(&table.fit_r2)
            .map(|((q, h), r2)| json!({ "q": q, "h": h, "r2": r2 }))
            .collect::<Vec<_>>(),
    });
    Ok(StageOutput {
        files: vec![
            Output::csv(format!("{stem}_fq.csv"), fq_csv),
            Output::csv(format!("{stem}_hq.csv"), hq_csv),
            Output::json(format!("{stem}.json"), &summary),
            Output::svg(format!("{stem}_fq.svg"), charts.fq.render()),
            Output::svg(format!("{stem}_hq.svg"), charts.hq.render()),
        ],
        summary,
        series: None,
    })
}

fn cwt_config(s: &CwtStage) -> CwtConfig<f64> {
    CwtConfig {
        omega0: s.omega0,
        norm: match s.norm {
            NormName::Energy => CwtNorm::Energy,
            NormName::Literal => CwtNorm::Literal,
        },
        padding: match s.padding {
            PaddingName::Zero => Padding::Zero,
            PaddingName::Periodic => Padding::Periodic,
        },
    }
}

fn background(s: &CwtStage) -> Background {
    match s.background {
        BackgroundName::White => Background::White,
        BackgroundName::Red => Background::Red(s.red_lag1.unwrap_or(0.0)),
        BackgroundName::RedEstimated => Background::RedEstimated,
    }
}

/// Scalogram on the default grid restricted to the requested periods.
pub fn scalogram(x: &TimeSeries64, s: &CwtStage) -> Result<Scalogram<f64>, Error> {
    let ff = fourier_factor(s.omega0);
    let scales: Vec<f64> = default_scales(x.len(), x.dt())
        .into_iter()
        .filter(|&sc| s.min_period.is_none_or(|p| sc * ff >= p) && s.max_period.is_none_or(|p| sc * ff <= p))
        .collect();
    if scales.is_empty() {
        return Err(Error::InvalidParameter(
            "no scales inside the requested period range".into(),
        ));
    }
    cwt_morlet_with(x, &scales, &cwt_config(s))
}

/// Normalised power map with the cone of influence and the pointwise 95%
/// significance outline.
pub fn power_map(sg: &Scalogram<f64>, bg: Background, title: &str) -> Result<HeatMap, Error> {
    let pointwise = global_power_with(sg, bg, Dof::Pointwise)?;
    let ff = sg.fourier_factor();
    let mask = (0..sg.n_scales())
        .map(|si| {
            (0..sg.n_times())
                .map(|ti| sg.power(si, ti) > pointwise.significance_95[si])
                .collect()
        })
        .collect();
    let coi = sg.times.iter().zip(&sg.coi).map(|(&t, &c)| (t, c * ff)).collect();
    Ok(HeatMap {
        title: title.into(),
        x_label: "time (s)".into(),
        y_label: "period (s)".into(),
        x: sg.times.clone(),
        y: sg.periods(),
        values: sg.normalized_power(),
        mask: Some(mask),
        overlay: vec![Series::new("cone of influence", coi, Style::Dashed, "#ffffff")],
        decades: 3.0,
    })
}

pub fn global_power_chart(
    gp: &wavescope::GlobalPower64,
    peaks: &[wavescope::cwt::PeriodPeak<f64>],
    title: &str,
) -> Chart {
    let mut c = Chart::new(title, Axis::log("period (s)"), Axis::linear("power / variance"));
    let v = gp.variance;
    let pw = gp.periods.iter().zip(&gp.power).map(|(&p, &w)| (p, w / v)).collect();
    let sig = gp
        .periods
        .iter()
        .zip(&gp.significance_95)
        .map(|(&p, &w)| (p, w / v))
        .collect();
    c.push(Series::new("global power", pw, Style::Line, PALETTE[0]));
    c.push(Series::new("95% significance", sig, Style::Dashed, PALETTE[1]));
    for pk in peaks {
        c.labels.push(Label {
            x: pk.period,
            y: pk.power / v,
            text: period_text(refined_period(gp, pk.period)),
        });
    }
    c
}

/// Peak period refined by a parabola through the log power of the peak bin
/// and its neighbours. The grid is uniform in log period.
pub fn refined_period(gp: &wavescope::GlobalPower64, period: f64) -> f64 {
    let Some(i) = gp.periods.iter().position(|&p| p == period) else {
        return period;
    };
    if i == 0 || i + 1 >= gp.len() {
        return period;
    }
    let (a, b, c) = (gp.power[i - 1].ln(), gp.power[i].ln(), gp.power[i + 1].ln());
    let curv = a - 2.0 * b + c;
    if !(curv < 0.0) {
        return period;
    }
    let delta = (0.5 * (a - c) / curv).clamp(-0.5, 0.5);
    (period.ln() + delta * (gp.periods[i + 1] / period).ln()).exp()
}

/// Period in the most readable unit.
pub fn period_text(p: f64) -> String {
    if p < 1.0 {
        format!("{:.0} ms", p * 1e3)
    } else {
        format!("{:.2} s", p)
    }
}

fn run_cwt(s: &CwtStage, x: &TimeSeries64, stem: &str, full: bool) -> Result<StageOutput, Error> {
    let sg = scalogram(x, s)?;
    let bg = background(s);
    let dof = match s.dof {
        DofName::Pointwise => Dof::Pointwise,
        DofName::TimeAveraged => Dof::TimeAveraged,
    };
    let gp = global_power_with(&sg, bg, dof)?;
    let peaks = dominant_periods(&gp, s.peaks);
    let mut files = Vec::new();
    let stride = s
        .time_stride
        .unwrap_or_else(|| sg.n_times().div_ceil(SCALOGRAM_COLUMNS).max(1));
    if full {
        let mut t = CsvTable::new(&["scale", "time", "re", "im"]);
        for (si, row) in sg.coeffs.iter().enumerate() {
            for ti in (0..sg.n_times()).step_by(stride) {
                t.row(&[sg.scales[si], sg.times[ti], row[ti].re, row[ti].im]);
            }
        }
        files.push(Output::csv(format!("{stem}_scalogram.csv"), t));
        files.push(Output::svg(
            format!("{stem}_scalogram.svg"),
            power_map(&sg, bg, "Normalised wavelet power")?.render(),
        ));
    }
    let mut t = CsvTable::new(&["period", "scale", "power", "significance_95", "n_averaged"]);
    for i in 0..gp.len() {
        t.row(&[
            gp.periods[i],
            gp.scales[i],
            gp.power[i],
            gp.significance_95[i],
            gp.n_averaged[i] as f64,
        ]);
    }
    files.push(Output::csv(format!("{stem}_global_power.csv"), t));
    files.push(Output::svg(
        format!("{stem}_global_power.svg"),
        global_power_chart(&gp, &peaks, "Global wavelet power").render(),
    ));
    let summary = json!({
        "peaks": peaks,
        "refined_periods": peaks.iter().map(|p| refined_period(&gp, p.period)).collect::<Vec<_>>(),
        "background": gp.background,
        "dof": dof,
        "norm": sg.norm,
        "variance": gp.variance,
        "lag1": sg.lag1,
        "scales": sg.n_scales(),
        "period_range": [gp.periods[0], gp.periods[gp.len() - 1]],
        "time_stride": if full { json!(stride) } else { Value::Null },
    });
    files.push(Output::json(format!("{stem}.json"), &summary));
    Ok(StageOutput {
        files,
        summary,
        series: None,
    })
}

fn phase_series(x: &TimeSeries64, period: f64, omega0: f64) -> Result<PhaseSeries<f64>, Error> {
    let cfg = CwtConfig {
        omega0,
        ..CwtConfig::default()
    };
    let sg = cwt_morlet_with(x, &default_scales(x.len(), x.dt()), &cfg)?;
    phase_at_scale(&sg, period / fourier_factor(omega0))
}

fn run_phase(s: &PhaseStage, x: &TimeSeries64, stem: &str, ctx: &Context) -> CliResult<StageOutput> {
    let lib = |e: Error| CliError::stage("phase", e);
    let a = phase_series(x, s.period, s.omega0).map_err(lib)?;
    let mut t = CsvTable::new(&["time", "phase", "amplitude", "defined", "interior"]);
    for i in 0..a.times.len() {
        t.row(&[
            a.times[i],
            a.phase[i],
            a.amplitude[i],
            a.defined[i] as u8 as f64,
            a.interior[i] as u8 as f64,
        ]);
    }
    let mut files = vec![Output::csv(format!("{stem}.csv"), t)];
    let mut summary = json!({ "scale": a.scale, "period": a.period });
    let Some(other) = &s.against else {
        let mut c = Chart::new(
            format!("Phase at period {}", period_text(a.period)),
            Axis::linear("time (s)"),
            Axis::linear("phase (rad)"),
        );
        c.legend = false;
        let pts: Vec<(f64, f64)> = a.times.iter().copied().zip(a.phase.iter().copied()).collect();
        c.push(Series::new("", decimate(&pts), Style::Points, PALETTE[0]));
        files.push(Output::svg(format!("{stem}.svg"), c.render()));
        files.push(Output::json(format!("{stem}.json"), &summary));
        return Ok(StageOutput {
            files,
            summary,
            series: None,
        });
    };
    let mut spec = other.clone();
    if spec.sample_rate.is_none() {
        spec.sample_rate = ctx.sample_rate;
    }
    let y = load_input(&spec, ctx.seed.wrapping_add(1))?;
    let b = phase_series(&y, s.period, s.omega0).map_err(lib)?;
    let d = phase_difference(&a, &b).map_err(lib)?;
    let mut t = CsvTable::new(&["time", "delta", "usable"]);
    for i in 0..d.delta.len() {
        t.row(&[a.times[i], d.delta[i], d.usable[i] as u8 as f64]);
    }
    files.push(Output::csv(format!("{stem}_difference.csv"), t));
    let longest = d.segments.iter().map(|g| g.duration()).fold(0.0, f64::max);
    summary["center"] = json!(d.center);
    summary["segments"] = json!(d.segments);
    summary["longest_segment"] = json!(longest);
    summary["usable_fraction"] = json!(d.usable.iter().filter(|&&u| u).count() as f64 / d.usable.len() as f64);
    let chart = phase_chart(
        &a.times,
        &d,
        &format!("Phase difference at period {}", period_text(a.period)),
    );
    files.push(Output::svg(format!("{stem}_difference.svg"), chart.render()));
    files.push(Output::json(format!("{stem}.json"), &summary));
    Ok(StageOutput {
        files,
        summary,
        series: None,
    })
}

/// Wrapped phase difference with synchronised intervals shaded.
pub fn phase_chart(times: &[f64], d: &wavescope::cwt::PhaseDifference<f64>, title: &str) -> Chart {
    let mut c = Chart::new(
        title,
        Axis::linear("time (s)"),
        Axis::linear("phase difference (rad)").with_range(-std::f64::consts::PI, std::f64::consts::PI),
    );
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&d.delta)
        .zip(&d.usable)
        .filter(|(_, &u)| u)
        .map(|((&t, &v), _)| (t, v))
        .collect();
    c.push(Series::new("usable samples", decimate(&pts), Style::Points, PALETTE[0]));
    c.spans = d.segments.iter().map(|g| (g.t_start, g.t_end)).collect();
    c
}

fn run_lyapunov(s: &LyapunovStage, x: &TimeSeries64, stem: &str) -> Result<StageOutput, Error> {
    let delay = s.delay.unwrap_or_else(|| estimate_delay(x));
    let mut cfg = EmbeddingConfig::new(s.dimension.unwrap_or(wavescope::lyapunov::DEFAULT_DIMENSION), delay);
    if let Some(w) = s.theiler {
        cfg = cfg.with_theiler(w);
    }
    if let Some(k) = s.max_iter {
        cfg = cfg.with_max_iter(k);
    }
    if let Some(r) = s.max_reference {
        cfg.max_reference = r;
    }
    let r = largest_lyapunov(x, &cfg)?;
    let dt = x.dt();
    let mut t = CsvTable::new(&["iteration", "time", "log_divergence"]);
    for (k, &v) in r.divergence.iter().enumerate() {
        t.row(&[k as f64, k as f64 * dt, v]);
    }
    let pts: Vec<(f64, f64)> = r
        .divergence
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, &v)| (k as f64 * dt, v))
        .collect();
    let (k0, k1) = r.fit_range;
    let window: Vec<(f64, f64)> = pts
        .iter()
        .copied()
        .filter(|p| p.0 >= k0 as f64 * dt - 1e-12 && p.0 <= k1 as f64 * dt + 1e-12)
        .collect();
    let mut chart = Chart::new(
        "Mean log divergence",
        Axis::linear("time (s)"),
        Axis::linear("<ln d(t)>"),
    );
    chart.push(Series::new("divergence", pts, Style::Line, PALETTE[0]));
    if !window.is_empty() {
        let mx = window.iter().map(|p| p.0).sum::<f64>() / window.len() as f64;
        let my = window.iter().map(|p| p.1).sum::<f64>() / window.len() as f64;
        let line = [window[0].0, window[window.len() - 1].0]
            .iter()
            .map(|&t| (t, my + r.lambda * (t - mx)))
            .collect();
        chart.push(Series::new(
            format!("slope {:.4} /s", r.lambda),
            line,
            Style::Dashed,
            PALETTE[1],
        ));
    }
    let mut summary = serde_json::to_value(&r).expect("serialisable result");
    if let Some(m) = summary.as_object_mut() {
        m.remove("divergence");
    }
    Ok(StageOutput {
        files: vec![
            Output::csv(format!("{stem}_divergence.csv"), t),
            Output::json(format!("{stem}.json"), &summary),
            Output::svg(format!("{stem}_divergence.svg"), chart.render()),
        ],
        summary,
        series: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_bins_keep_power_laws() {
        let pts: Vec<(f64, f64)> = (1..10_000).map(|k| (k as f64, (k as f64).powf(-2.0))).collect();
        let b = log_bins(&pts, 64);
        assert!(b.len() <= 64);
        for &(f, p) in &b {
            assert!((p * f * f - 1.0).abs() < 1e-9, "{f} {p}");
        }
    }

    #[test]
    fn acf_zero_of_a_sine_is_a_quarter_period() {
        let x = TimeSeries64::new(
            (0..4096)
                .map(|i| (i as f64 * std::f64::consts::TAU / 64.0).cos())
                .collect(),
            1.0,
        )
        .unwrap();
        assert!((first_acf_zero(&x) as i64 - 16).abs() <= 1);
    }

    #[test]
    fn guide_intercept_of_exact_power_law() {
        let freqs: Vec<f64> = (1..512).map(|k| k as f64).collect();
        let power = freqs.iter().map(|f| 3.0 * f.powf(-5.0 / 3.0)).collect();
        let ps = PowerSpectrum::from_parts(freqs, power).unwrap();
        let icpt = guide_intercept(&ps, (2.0, 200.0), -5.0 / 3.0);
        assert!((icpt - 3f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn period_labels() {
        assert_eq!(period_text(0.018), "18 ms");
        assert_eq!(period_text(0.578), "578 ms");
        assert_eq!(period_text(2.5), "2.50 s");
    }
}
