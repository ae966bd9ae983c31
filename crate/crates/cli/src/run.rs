use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use crate::artifact::{Artifact, Sink};
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK};
use crate::stages::{describe_input, execute, load_input, Context, StageOutput};

/// Name of the report written at the end of every run.
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub index: usize,
    pub stage: String,
    pub ok: bool,
    pub summary: Value,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub exit_code: i32,
    pub error: Option<String>,
    pub stages: Vec<StageReport>,
    pub artifacts: Vec<Artifact>,
    #[serde(skip)]
    pub failure: Option<CliError>,
}

impl RunReport {
    fn failed(output_dir: PathBuf, e: CliError, stages: Vec<StageReport>, artifacts: Vec<Artifact>) -> Self {
        Self {
            output_dir,
            exit_code: e.exit_code(),
            error: Some(e.to_string()),
            stages,
            artifacts,
            failure: Some(e),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.exit_code == EXIT_OK
    }

    /// Summary of the first stage called `name`.
    pub fn summary(&self, name: &str) -> Option<&Value> {
        self.stages.iter().find(|s| s.stage == name).map(|s| &s.summary)
    }

    pub fn into_result(self) -> Result<Self, CliError> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Validates `cfg`, then loads the input and runs every stage in order.
///
/// Nothing is computed or written when validation fails. A failing stage
/// leaves `<stem>.failed` beside the artifacts of the stages before it.
pub fn run(cfg: &RunConfig) -> RunReport {
    let dir = cfg.output_dir.clone();
    if let Err(e) = cfg.validate() {
        return RunReport::failed(dir, e, Vec::new(), Vec::new());
    }
    let mut sink = match Sink::create(&dir, cfg.formats) {
        Ok(s) => s,
        Err(e) => return RunReport::failed(dir, e, Vec::new(), Vec::new()),
    };
    let mut stages = Vec::new();
    let outcome = drive(cfg, &mut sink, &mut stages);
    let mut report = match outcome {
        Ok(()) => RunReport {
            output_dir: dir,
            exit_code: EXIT_OK,
            error: None,
            stages,
            artifacts: Vec::new(),
            failure: None,
        },
        Err(e) => RunReport::failed(dir, e, stages, Vec::new()),
    };
    report.artifacts = sink.artifacts().to_vec();
    let mut text = serde_json::to_string_pretty(&report).expect("serialisable report");
    text.push('\n');
    if let Err(e) = sink.put_unlisted(REPORT_FILE, text.as_bytes()) {
        if report.failure.is_none() {
            report.exit_code = e.exit_code();
            report.error = Some(e.to_string());
            report.failure = Some(e);
        }
    }
    report
}

fn drive(cfg: &RunConfig, sink: &mut Sink, stages: &mut Vec<StageReport>) -> Result<(), CliError> {
    let input = attempt(sink, "00_input", || {
        let x = load_input(&cfg.input, cfg.seed)?;
        let out = describe_input(&x, "00_input");
        Ok((x, out))
    })?;
    let (mut x, out) = input;
    stages.push(StageReport {
        index: 0,
        stage: "input".into(),
        ok: true,
        summary: out.summary,
    });
    let ctx = Context {
        seed: cfg.seed,
        sample_rate: cfg.input.sample_rate.or(Some(x.sample_rate())),
    };
    for (i, spec) in cfg.pipeline.iter().enumerate() {
        let index = i + 1;
        let stem = format!("{index:02}_{}", spec.name());
        let result = attempt(sink, &stem, || {
            let out = execute(spec, &x, &stem, &ctx)?;
            Ok(((), out))
        });
        match result {
            Ok(((), out)) => {
                if let Some(y) = out.series {
                    x = y;
                }
                stages.push(StageReport {
                    index,
                    stage: spec.name().into(),
                    ok: true,
                    summary: out.summary,
                });
            }
            Err(e) => {
                stages.push(StageReport {
                    index,
                    stage: spec.name().into(),
                    ok: false,
                    summary: Value::Null,
                });
                return Err(e);
            }
        }
    }
    Ok(())
}

/// Runs `f` and writes its files. On any failure, including one halfway
/// through writing, `<stem>.failed` is left behind.
fn attempt<T>(
    sink: &mut Sink,
    stem: &str,
    f: impl FnOnce() -> Result<(T, StageOutput), CliError>,
) -> Result<(T, StageOutput), CliError> {
    let result = f().and_then(|(v, out)| {
        for file in &out.files {
            sink.put(file)?;
        }
        sink.clear_failed(stem)?;
        Ok((v, out))
    });
    if let Err(e) = &result {
        // the original error is what gets reported; a marker write failure
        // cannot be reported anywhere better
        let _ = sink.mark_failed(stem, &e.to_string());
    }
    result
}
