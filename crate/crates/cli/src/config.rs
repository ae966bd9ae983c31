//! Declarative run configuration.
//!
//! A run is described by a TOML document:
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//! formats = ["csv", "json", "svg"]
//!
//! [input]
//! sample_rate = 1.0
//! [input.synth]
//! kind = "fbm"
//! hurst = 0.7
//! n = 16384
//!
//! [[pipeline]]
//! stage = "mfdfa"
//! series = "walk"
//! ```
//!
//! Values given on the command line override the file, which overrides the
//! built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub formats: Formats,
    pub input: InputSpec,
    #[serde(default)]
    pub pipeline: Vec<StageSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("wavescope-out")
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub sample_rate: Option<f64>,
    pub formats: Option<Formats>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads a config file; relative CSV paths are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.input.rebase(base);
            for stage in &mut cfg.pipeline {
                if let StageSpec::Phase(p) = stage {
                    if let Some(other) = p.against.as_mut() {
                        other.rebase(base);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(rate) = o.sample_rate {
            self.input.sample_rate = Some(rate);
        }
        if let Some(f) = o.formats {
            self.formats = f;
        }
    }

    /// Checks every parameter that can be checked without touching data.
    pub fn validate(&self) -> CliResult<()> {
        self.input.validate("input")?;
        for (i, stage) in self.pipeline.iter().enumerate() {
            stage
                .validate()
                .map_err(|m| CliError::Config(format!("pipeline[{i}] ({}): {m}", stage.name())))?;
            if let StageSpec::Phase(PhaseStage {
                against: Some(other), ..
            }) = stage
            {
                let mut other = other.clone();
                if other.sample_rate.is_none() {
                    other.sample_rate = self.input.sample_rate;
                }
                other.validate(&format!("pipeline[{i}].against"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Which artifact kinds are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Format>", into = "Vec<Format>")]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl Formats {
    pub fn enabled(&self, f: Format) -> bool {
        match f {
            Format::Csv => self.csv,
            Format::Json => self.json,
            Format::Svg => self.svg,
        }
    }
}

impl From<Vec<Format>> for Formats {
    fn from(v: Vec<Format>) -> Self {
        Self {
            csv: v.contains(&Format::Csv),
            json: v.contains(&Format::Json),
            svg: v.contains(&Format::Svg),
        }
    }
}

impl From<Formats> for Vec<Format> {
    fn from(f: Formats) -> Self {
        [Format::Csv, Format::Json, Format::Svg]
            .into_iter()
            .filter(|&k| f.enabled(k))
            .collect()
    }
}

/// Where the analysed series comes from. Exactly one of `csv` and `synth`
/// must be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Hz. Required unless a CSV time column supplies it.
    pub sample_rate: Option<f64>,
    /// Generator seed; defaults to the run seed.
    pub seed: Option<u64>,
    pub csv: Option<CsvInput>,
    pub synth: Option<SynthSpec>,
}

impl InputSpec {
    fn rebase(&mut self, base: &Path) {
        if let Some(c) = self.csv.as_mut() {
            if c.path.is_relative() {
                c.path = base.join(&c.path);
            }
        }
    }

    pub fn validate(&self, at: &str) -> CliResult<()> {
        let err = |m: String| Err(CliError::Config(format!("{at}: {m}")));
        match (&self.csv, &self.synth) {
            (None, None) => return err("one of `csv` or `synth` is required".into()),
            (Some(_), Some(_)) => return err("`csv` and `synth` are mutually exclusive".into()),
            _ => {}
        }
        let has_time = self.csv.as_ref().is_some_and(|c| c.time_column.is_some());
        match self.sample_rate {
            None if !has_time => return err("sample_rate is required".into()),
            Some(r) if !(r > 0.0 && r.is_finite()) => return err(format!("sample_rate must be positive, got {r}")),
            _ => {}
        }
        if let Some(s) = &self.synth {
            s.validate().or_else(err)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvInput {
    pub path: PathBuf,
    /// Zero-based value column.
    #[serde(default)]
    pub column: usize,
    pub time_column: Option<usize>,
    #[serde(default)]
    pub header: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    /// Seconds.
    pub period: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Radians.
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

fn default_drive_freq() -> f64 {
    70.0
}

fn default_impacts() -> usize {
    500
}

/// Synthetic input generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthSpec {
    Fbm {
        hurst: f64,
        n: usize,
    },
    Fgn {
        hurst: f64,
        n: usize,
    },
    PowerLaw {
        beta: f64,
        n: usize,
    },
    SineMix {
        n: usize,
        components: Vec<ComponentSpec>,
        /// Standard deviation of added white noise.
        #[serde(default)]
        noise: f64,
    },
    BouncingBall {
        amplitude: f64,
        restitution: f64,
        #[serde(default = "default_drive_freq")]
        drive_freq: f64,
        #[serde(default = "default_impacts")]
        n_impacts: usize,
    },
    Cascade {
        multiplier: f64,
        levels: u32,
    },
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), String> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(format!("{name} must lie in (0, 1), got {v}"))
            }
        };
        let length = |n: usize| {
            if n >= 16 {
                Ok(())
            } else {
                Err(format!("n must be at least 16, got {n}"))
            }
        };
        match self {
            SynthSpec::Fbm { hurst, n } | SynthSpec::Fgn { hurst, n } => {
                open_unit("hurst", *hurst)?;
                length(*n)
            }
            SynthSpec::PowerLaw { beta, n } => {
                if !beta.is_finite() {
                    return Err("beta must be finite".into());
                }
                length(*n)
            }
            SynthSpec::SineMix { n, components, noise } => {
                if components.is_empty() {
                    return Err("sine_mix needs at least one component".into());
                }
                if components.iter().any(|c| !(c.period > 0.0) || !c.amplitude.is_finite()) {
                    return Err("component periods must be positive".into());
                }
                if !(*noise >= 0.0) {
                    return Err("noise must be >= 0".into());
                }
                length(*n)
            }
            SynthSpec::BouncingBall {
                amplitude,
                restitution,
                drive_freq,
                n_impacts,
            } => {
                open_unit("restitution", *restitution)?;
                if !(*amplitude >= 0.0) || !(*drive_freq > 0.0) || *n_impacts == 0 {
                    return Err("amplitude >= 0, drive_freq > 0 and n_impacts > 0 required".into());
                }
                Ok(())
            }
            SynthSpec::Cascade { multiplier, levels } => {
                if !(*multiplier > 0.5 && *multiplier < 1.0) {
                    return Err(format!("multiplier must lie in (0.5, 1), got {multiplier}"));
                }
                if !(4..=24).contains(levels) {
                    return Err(format!("levels must lie in 4..=24, got {levels}"));
                }
                Ok(())
            }
        }
    }
}

/// One pipeline step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageSpec {
    Denoise(DenoiseStage),
    Spectrum(SpectrumStage),
    Fit(FitStage),
    Heisenberg(HeisenbergStage),
    Mfdfa(MfdfaStage),
    Cwt(CwtStage),
    GlobalPower(CwtStage),
    Phase(PhaseStage),
    Lyapunov(LyapunovStage),
}

impl StageSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StageSpec::Denoise(_) => "denoise",
            StageSpec::Spectrum(_) => "spectrum",
            StageSpec::Fit(_) => "fit",
            StageSpec::Heisenberg(_) => "heisenberg",
            StageSpec::Mfdfa(_) => "mfdfa",
            StageSpec::Cwt(_) => "cwt",
            StageSpec::GlobalPower(_) => "global_power",
            StageSpec::Phase(_) => "phase",
            StageSpec::Lyapunov(_) => "lyapunov",
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            StageSpec::Denoise(s) => {
                if s.levels == 0 || s.levels > 20 {
                    return Err(format!("levels must lie in 1..=20, got {}", s.levels));
                }
                if s.embed_delay == Some(0) {
                    return Err("embed_delay must be >= 1".into());
                }
                check_taps(s.taps)
            }
            StageSpec::Spectrum(_) => Ok(()),
            StageSpec::Fit(s) => check_band(&s.band),
            StageSpec::Heisenberg(s) => {
                check_band(&s.band)?;
                if s.targets.is_empty() || s.targets.iter().any(|t| !t.is_finite()) {
                    return Err("targets must be a non-empty list of slopes".into());
                }
                if s.tolerance.is_some_and(|t| !(t > 0.0)) {
                    return Err("tolerance must be positive".into());
                }
                Ok(())
            }
            StageSpec::Mfdfa(s) => {
                if let Some(q) = &s.q {
                    if q.is_empty() || q.iter().any(|v| !v.is_finite()) {
                        return Err("q must be a non-empty list of finite values".into());
                    }
                }
                if let Some(r) = &s.fit_range {
                    if r.len() != 2 || r[0] >= r[1] {
                        return Err("fit_range must be [lo, hi] with lo < hi".into());
                    }
                }
                check_taps(s.taps)
            }
            StageSpec::Cwt(s) | StageSpec::GlobalPower(s) => s.validate(),
            StageSpec::Phase(s) => {
                if !(s.period > 0.0) {
                    return Err("period must be positive".into());
                }
                if !(s.omega0 >= 5.0) {
                    return Err("omega0 must be >= 5".into());
                }
                Ok(())
            }
            StageSpec::Lyapunov(s) => {
                if s.dimension.is_some_and(|m| m < 2) {
                    return Err("dimension must be >= 2".into());
                }
                if s.delay == Some(0) {
                    return Err("delay must be >= 1".into());
                }
                Ok(())
            }
        }
    }
}

fn check_taps(taps: usize) -> Result<(), String> {
    match taps {
        4 | 8 => Ok(()),
        _ => Err(format!("taps must be 4 or 8, got {taps}")),
    }
}

fn check_band(band: &[f64]) -> Result<(), String> {
    match band {
        [lo, hi] if *lo > 0.0 && hi > lo && hi.is_finite() => Ok(()),
        _ => Err(format!("band must be [lo, hi] with 0 < lo < hi, got {band:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    /// Zero the finest detail bands.
    #[default]
    Kill,
    /// Soft-threshold every detail band.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    #[default]
    None,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SeriesName {
    #[default]
    Noise,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    #[default]
    Energy,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PaddingName {
    #[default]
    Zero,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundName {
    #[default]
    White,
    /// AR(1) with the lag-1 coefficient given by `red_lag1`.
    Red,
    /// AR(1) with the lag-1 coefficient estimated from the signal.
    RedEstimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DofName {
    #[default]
    Pointwise,
    TimeAveraged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseStage {
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = RuleName::Kill)]
    pub rule: RuleName,
    /// Finest levels zeroed by the kill rule (default: half the levels).
    #[arg(long)]
    pub kill_count: Option<usize>,
    /// Filter length: 4 or 8.
    #[arg(long, default_value_t = 4)]
    pub taps: usize,
    /// Phase-space delay in samples (default: first zero of the autocorrelation).
    #[arg(long)]
    pub embed_delay: Option<usize>,
}

impl Default for DenoiseStage {
    fn default() -> Self {
        Self {
            levels: 5,
            rule: RuleName::Kill,
            kill_count: None,
            taps: 4,
            embed_delay: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumStage {
    #[arg(long, value_enum, default_value_t = WindowName::None)]
    pub window: WindowName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct FitStage {
    #[serde(default)]
    #[arg(long, value_enum, default_value_t = WindowName::None)]
    pub window: WindowName,
    /// Frequency band in Hz.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], required = true)]
    pub band: Vec<f64>,
}

fn default_targets() -> Vec<f64> {
    vec![
        wavescope::spectral::NEUTRAL_TURBULENCE_SLOPE,
        wavescope::spectral::VISCOUS_DISSIPATION_SLOPE,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct HeisenbergStage {
    #[serde(default)]
    #[arg(long, value_enum, default_value_t = WindowName::None)]
    pub window: WindowName,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], required = true)]
    pub band: Vec<f64>,
    /// Reference slopes (default: -5/3 and -7).
    #[serde(default = "default_targets")]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_targets())]
    pub targets: Vec<f64>,
    /// Absolute slope tolerance (default: 15% of each target).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct MfdfaStage {
    /// Moment orders (default: -10..=10).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = SeriesName::Noise)]
    pub series: SeriesName,
    /// Filter length: 4 or 8.
    #[arg(long, default_value_t = 4)]
    pub taps: usize,
    /// Segment lengths bounding the exponent fit.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub fit_range: Option<Vec<usize>>,
}

impl Default for MfdfaStage {
    fn default() -> Self {
        Self {
            q: None,
            series: SeriesName::Noise,
            taps: 4,
            fit_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct CwtStage {
    #[arg(long, default_value_t = wavescope::cwt::DEFAULT_OMEGA0)]
    pub omega0: f64,
    #[arg(long = "cwt-norm", value_enum, default_value_t = NormName::Energy)]
    pub norm: NormName,
    #[arg(long, value_enum, default_value_t = PaddingName::Zero)]
    pub padding: PaddingName,
    #[arg(long, value_enum, default_value_t = BackgroundName::White)]
    pub background: BackgroundName,
    #[arg(long)]
    pub red_lag1: Option<f64>,
    #[arg(long, value_enum, default_value_t = DofName::Pointwise)]
    pub dof: DofName,
    /// Number of reported peaks.
    #[arg(long, default_value_t = 4)]
    pub peaks: usize,
    /// Seconds.
    #[arg(long)]
    pub min_period: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub max_period: Option<f64>,
    /// Time decimation of the scalogram CSV (default: keeps about 1024 columns).
    #[arg(long)]
    pub time_stride: Option<usize>,
}

impl Default for CwtStage {
    fn default() -> Self {
        Self {
            omega0: wavescope::cwt::DEFAULT_OMEGA0,
            norm: NormName::Energy,
            padding: PaddingName::Zero,
            background: BackgroundName::White,
            red_lag1: None,
            dof: DofName::Pointwise,
            peaks: 4,
            min_period: None,
            max_period: None,
            time_stride: None,
        }
    }
}

impl CwtStage {
    fn validate(&self) -> Result<(), String> {
        if !(self.omega0 >= 5.0) {
            return Err("omega0 must be >= 5".into());
        }
        match (self.background, self.red_lag1) {
            (BackgroundName::Red, None) => return Err("background = red needs red_lag1".into()),
            (BackgroundName::Red, Some(a)) if !(a.abs() < 1.0) => return Err("red_lag1 must lie in (-1, 1)".into()),
            (BackgroundName::White | BackgroundName::RedEstimated, Some(_)) => {
                return Err("red_lag1 only applies to background = red".into())
            }
            _ => {}
        }
        if let (Some(lo), Some(hi)) = (self.min_period, self.max_period) {
            if lo >= hi {
                return Err("min_period must be below max_period".into());
            }
        }
        if self.time_stride == Some(0) {
            return Err("time_stride must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct PhaseStage {
    /// Seconds.
    #[arg(long, required = true)]
    pub period: f64,
    #[serde(default = "default_omega0")]
    #[arg(long, default_value_t = wavescope::cwt::DEFAULT_OMEGA0)]
    pub omega0: f64,
    /// Second series for the phase difference. Its sample rate defaults to
    /// the main input's and its seed to the run seed plus one.
    #[serde(default)]
    #[arg(skip)]
    pub against: Option<InputSpec>,
}

fn default_omega0() -> f64 {
    wavescope::cwt::DEFAULT_OMEGA0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovStage {
    /// Embedding dimension (default 5).
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Samples (default: estimated from the autocorrelation).
    #[arg(long)]
    pub delay: Option<usize>,
    #[arg(long)]
    pub theiler: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub max_reference: Option<usize>,
}
