use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavescope::signal::write_timed_csv;
use wavescope_cli::config::*;
use wavescope_cli::error::{CliError, CliResult};
use wavescope_cli::stages::load_input;
use wavescope_cli::{figure_repro, init_threads, run, Figure, RunReport};

/// Wavelet, fractal and chaos analysis of time series.
///
/// Exit codes: 0 success, 2 configuration error, 3 stage failure, 4 i/o error.
/// WAVESCOPE_THREADS caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "wavescope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic series as CSV (time,value).
    Synth(SynthArgs),
    /// Power spectrum as CSV (freq,power).
    Spectrum(Analysis<SpectrumStage>),
    /// Power-law fit of the spectrum over a band.
    Fit(Analysis<FitStage>),
    /// Compare spectral slopes with reference regimes.
    Heisenberg(Analysis<HeisenbergStage>),
    /// Wavelet denoising with coefficient dump and phase-space plot.
    Denoise(Analysis<DenoiseStage>),
    /// Multifractal detrended fluctuation analysis.
    Mfdfa(Analysis<MfdfaStage>),
    /// Morlet scalogram, global power and dominant periods.
    Cwt(Analysis<CwtStage>),
    /// Global wavelet power with significance, without the scalogram dump.
    Globalpower(Analysis<CwtStage>),
    /// Instantaneous phase at one period, or a phase difference with --against.
    Phase(PhaseArgs),
    /// Largest Lyapunov exponent from a delay embedding.
    Lyapunov(Analysis<LyapunovStage>),
    /// Execute a TOML pipeline.
    Run(RunArgs),
    /// Rebuild a figure layout on synthetic data.
    FigureRepro(FigureArgs),
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// CSV file holding the series.
    #[arg(long, short)]
    input: PathBuf,
    /// Zero-based value column.
    #[arg(long, default_value_t = 0)]
    column: usize,
    /// Zero-based time column; sets the sample rate from the time stamps.
    #[arg(long)]
    time_column: Option<usize>,
    /// Skip the first row.
    #[arg(long)]
    header: bool,
    /// Sample rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
}

impl InputArgs {
    fn spec(&self) -> InputSpec {
        InputSpec {
            sample_rate: self.rate,
            seed: None,
            csv: Some(CsvInput {
                path: self.input.clone(),
                column: self.column,
                time_column: self.time_column,
                header: self.header,
            }),
            synth: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, short, default_value = "wavescope-out")]
    out: PathBuf,
    /// Artifact kinds to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json, Format::Svg])]
    formats: Vec<Format>,
}

#[derive(Debug, Args)]
struct Analysis<S: Args> {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    stage: S,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[command(flatten)]
    analysis: Analysis<PhaseStage>,
    /// Second CSV series (same layout and rate) for the phase difference.
    #[arg(long)]
    against: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Sample rate of the input in Hz.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    formats: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureName {
    Fig7,
    Fig8,
    Fig9a,
    Fig9b,
    Fig10a,
    Fig10b,
    Fig11,
    Fig12,
    All,
}

#[derive(Debug, Args)]
struct FigureArgs {
    name: FigureName,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Generator {
    Fbm,
    Fgn,
    PowerLaw,
    SineMix,
    BouncingBall,
    Cascade,
}

#[derive(Debug, Args)]
struct SynthArgs {
    generator: Generator,
    /// Number of samples.
    #[arg(long, short, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0.7)]
    hurst: f64,
    /// Spectral exponent of power-law noise.
    #[arg(long, default_value_t = 5.0 / 3.0)]
    beta: f64,
    /// Sine component as PERIOD[:AMPLITUDE[:PHASE]], seconds and radians.
    #[arg(long = "component", value_parser = parse_component)]
    components: Vec<ComponentSpec>,
    /// Standard deviation of white noise added to a sine mix.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Table forcing of the bouncing ball.
    #[arg(long, default_value_t = 6.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.9)]
    restitution: f64,
    /// Hz.
    #[arg(long, default_value_t = 70.0)]
    drive_freq: f64,
    #[arg(long, default_value_t = 500)]
    impacts: usize,
    #[arg(long, default_value_t = 0.75)]
    multiplier: f64,
    #[arg(long, default_value_t = 12)]
    levels: u32,
    /// Sample rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_component(s: &str) -> Result<ComponentSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(format!("expected PERIOD[:AMPLITUDE[:PHASE]], got '{s}'"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok(ComponentSpec {
        period: num(parts[0])?,
        amplitude: parts.get(1).map(|t| num(t)).transpose()?.unwrap_or(1.0),
        phase: parts.get(2).map(|t| num(t)).transpose()?.unwrap_or(0.0),
    })
}

impl SynthArgs {
    fn spec(&self) -> InputSpec {
        let synth = match self.generator {
            Generator::Fbm => SynthSpec::Fbm {
                hurst: self.hurst,
                n: self.n,
            },
            Generator::Fgn => SynthSpec::Fgn {
                hurst: self.hurst,
                n: self.n,
            },
            Generator::PowerLaw => SynthSpec::PowerLaw {
                beta: self.beta,
                n: self.n,
            },
            Generator::SineMix => SynthSpec::SineMix {
                n: self.n,
                components: self.components.clone(),
                noise: self.noise,
            },
            Generator::BouncingBall => SynthSpec::BouncingBall {
                amplitude: self.amplitude,
                restitution: self.restitution,
                drive_freq: self.drive_freq,
                n_impacts: self.impacts,
            },
            Generator::Cascade => SynthSpec::Cascade {
                multiplier: self.multiplier,
                levels: self.levels,
            },
        };
        InputSpec {
            sample_rate: self.rate,
            seed: Some(self.seed),
            csv: None,
            synth: Some(synth),
        }
    }
}

fn single_stage(input: InputSpec, output: &OutputArgs, stage: StageSpec) -> RunConfig {
    RunConfig {
        seed: 0,
        output_dir: output.out.clone(),
        formats: output.formats.clone().into(),
        input,
        pipeline: vec![stage],
    }
}

fn analysis<S: Args>(a: Analysis<S>, wrap: impl FnOnce(S) -> StageSpec) -> RunConfig {
    single_stage(a.input.spec(), &a.output, wrap(a.stage))
}

fn report(r: RunReport) -> CliResult<()> {
    let mut out = io::stdout().lock();
    for a in &r.artifacts {
        let _ = writeln!(out, "{}  {}", a.sha256, r.output_dir.join(&a.path).display());
    }
    r.into_result().map(|_| ())
}

fn synth(args: &SynthArgs) -> CliResult<()> {
    let spec = args.spec();
    spec.validate("synth")?;
    let x = load_input(&spec, args.seed)?;
    let sink = |e: wavescope::Error| CliError::stage("synth", e);
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = io::BufWriter::new(file);
            write_timed_csv(&x, &mut w).map_err(|e| CliError::io(path, e))?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => write_timed_csv(&x, io::stdout().lock()).map_err(sink),
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    let cfg = match cmd {
        Command::Synth(a) => return synth(&a),
        Command::Spectrum(a) => analysis(a, StageSpec::Spectrum),
        Command::Fit(a) => analysis(a, StageSpec::Fit),
        Command::Heisenberg(a) => analysis(a, StageSpec::Heisenberg),
        Command::Denoise(a) => analysis(a, StageSpec::Denoise),
        Command::Mfdfa(a) => analysis(a, StageSpec::Mfdfa),
        Command::Cwt(a) => analysis(a, StageSpec::Cwt),
        Command::Globalpower(a) => analysis(a, StageSpec::GlobalPower),
        Command::Lyapunov(a) => analysis(a, StageSpec::Lyapunov),
        Command::Phase(p) => {
            let against = p.against.map(|path| {
                let mut other = p.analysis.input.clone();
                other.input = path;
                other.spec()
            });
            analysis(p.analysis, |mut s| {
                s.against = against;
                StageSpec::Phase(s)
            })
        }
        Command::Run(a) => {
            let mut cfg = RunConfig::load(&a.config)?;
            cfg.apply(&Overrides {
                seed: a.seed,
                output_dir: a.output_dir,
                sample_rate: a.rate,
                formats: a.formats.map(Into::into),
            });
            cfg
        }
        Command::FigureRepro(a) => {
            let figs = match a.name {
                FigureName::All => Figure::ALL.to_vec(),
                FigureName::Fig7 => vec![Figure::Fig7],
                FigureName::Fig8 => vec![Figure::Fig8],
                FigureName::Fig9a => vec![Figure::Fig9a],
                FigureName::Fig9b => vec![Figure::Fig9b],
                FigureName::Fig10a => vec![Figure::Fig10a],
                FigureName::Fig10b => vec![Figure::Fig10b],
                FigureName::Fig11 => vec![Figure::Fig11],
                FigureName::Fig12 => vec![Figure::Fig12],
            };
            for fig in figs {
                report(figure_repro(fig, &a.output.out, a.output.formats.clone().into()))?;
            }
            return Ok(());
        }
    };
    report(run(&cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| dispatch(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavescope: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
