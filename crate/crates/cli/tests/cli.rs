use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use wavescope_cli::config::Formats;
use wavescope_cli::error::{EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_STAGE};
use wavescope_cli::run::REPORT_FILE;
use wavescope_cli::{figure_repro, run, Figure, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_wavescope");

fn config(dir: &Path, body: &str) -> RunConfig {
    let text = format!("output_dir = {:?}\n{body}", dir.to_str().unwrap());
    RunConfig::from_toml_str(&text).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fbm_pipeline_recovers_hurst() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        r#"
seed = 3
[input]
sample_rate = 1.0
[input.synth]
kind = "fbm"
hurst = 0.7
n = 16384

[[pipeline]]
stage = "mfdfa"
series = "walk"
"#,
    );
    let report = run(&cfg);
    assert!(report.is_ok(), "{:?}", report.error);
    let h = report.summary("mfdfa").unwrap()["hurst"].as_f64().unwrap();
    assert!((0.63..=0.77).contains(&h), "h(2) = {h}");

    let on_disk = read_json(&tmp.path().join(REPORT_FILE));
    assert_eq!(on_disk["exit_code"], 0);
    for a in &report.artifacts {
        let bytes = fs::read(tmp.path().join(&a.path)).unwrap();
        assert_eq!(wavescope_cli::artifact::sha256_hex(&bytes), a.sha256, "{}", a.path);
    }
    assert!(report.artifacts.iter().any(|a| a.path == "01_mfdfa_hq.csv"));
}

#[test]
fn missing_sample_rate_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = config(
        &out,
        r#"
[input.synth]
kind = "fgn"
hurst = 0.5
n = 1024
[[pipeline]]
stage = "spectrum"
"#,
    );
    let report = run(&cfg);
    assert_eq!(report.exit_code, EXIT_CONFIG);
    assert!(report.error.unwrap().contains("sample_rate"));
    assert!(!out.exists());
}

#[test]
fn failing_stage_leaves_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        r#"
[input]
sample_rate = 1.0
[input.synth]
kind = "fgn"
hurst = 0.5
n = 64
[[pipeline]]
stage = "spectrum"
[[pipeline]]
stage = "mfdfa"
[[pipeline]]
stage = "spectrum"
"#,
    );
    let report = run(&cfg);
    assert_eq!(report.exit_code, EXIT_STAGE);
    assert!(tmp.path().join("01_spectrum.csv").exists());
    let marker = fs::read_to_string(tmp.path().join("02_mfdfa.failed")).unwrap();
    assert!(!marker.trim().is_empty());
    assert!(!tmp.path().join("03_spectrum.csv").exists());
    let stages = read_json(&tmp.path().join(REPORT_FILE))["stages"].clone();
    assert_eq!(stages.as_array().unwrap().len(), 3);
    assert_eq!(stages[2]["ok"], false);
}

#[test]
fn missing_csv_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        r#"
[input]
sample_rate = 10.0
[input.csv]
path = "/nonexistent/series.csv"
"#,
    );
    let report = run(&cfg);
    assert_eq!(report.exit_code, EXIT_IO);
    assert!(report.error.unwrap().contains("/nonexistent/series.csv"));
}

fn wavescope(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(BIN).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let out = wavescope(
        &[
            "synth", "fgn", "--n", "2048", "--rate", "100", "--seed", "1", "-o", "x.csv",
        ],
        dir,
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = wavescope(
        &[
            "spectrum",
            "-i",
            "x.csv",
            "--header",
            "--time-column",
            "0",
            "--column",
            "1",
            "-o",
            "spec",
        ],
        dir,
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let listed = String::from_utf8(out.stdout).unwrap();
    assert!(listed.lines().any(|l| l.ends_with("01_spectrum.csv") && l.len() > 64));

    // no rate and no time column
    let out = wavescope(
        &["spectrum", "-i", "x.csv", "--header", "--column", "1", "-o", "bad"],
        dir,
    );
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample_rate"));
    assert!(!dir.join("bad").exists());

    let out = wavescope(&["spectrum", "-i", "missing.csv", "--rate", "1", "-o", "io"], dir);
    assert_eq!(out.status.code(), Some(EXIT_IO));

    let out = wavescope(
        &[
            "mfdfa", "-i", "x.csv", "--header", "--column", "1", "--rate", "100", "--taps", "6",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    let out = wavescope(
        &[
            "fit", "-i", "x.csv", "--header", "--column", "1", "--rate", "100", "--bogus",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    let out = Command::new(BIN)
        .args(["spectrum", "-i", "x.csv", "--header", "--column", "1", "--rate", "100"])
        .current_dir(dir)
        .env("WAVESCOPE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn run_flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("cfg.toml"),
        r#"
seed = 1
output_dir = "from_file"
[input]
sample_rate = 50.0
[input.synth]
kind = "fgn"
hurst = 0.6
n = 1024
[[pipeline]]
stage = "spectrum"
"#,
    )
    .unwrap();
    let out = wavescope(
        &[
            "run",
            "cfg.toml",
            "--output-dir",
            "from_flag",
            "--rate",
            "20",
            "--formats",
            "json",
        ],
        dir,
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.join("from_file").exists());
    let input = &read_json(&dir.join("from_flag").join(REPORT_FILE))["stages"][0]["summary"];
    assert_eq!(input["sample_rate"], 20.0);
    // csv and svg were switched off
    assert!(!dir.join("from_flag/01_spectrum.csv").exists());
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let digests = |threads: &str, out: &str| {
        let o = Command::new(BIN)
            .args(["figure-repro", "fig10a", "--out", out])
            .current_dir(dir)
            .env("WAVESCOPE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(EXIT_OK));
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .map(|l| l.split_whitespace().next().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(digests("1", "a"), digests("4", "b"));
}

#[test]
fn figure_layouts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for fig in [Figure::Fig9b, Figure::Fig10a, Figure::Fig12] {
        let r = figure_repro(fig, dir, Formats::default());
        assert!(r.is_ok(), "{}: {:?}", fig.name(), r.error);
    }

    let f10 = read_json(&dir.join("fig10a.json"));
    let labels: Vec<&str> = f10["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(labels.len(), 4);
    let svg = fs::read_to_string(dir.join("fig10a_global_power.svg")).unwrap();
    for l in &labels {
        assert!(svg.contains(l), "{l}");
    }

    let f12 = read_json(&dir.join("fig12.json"));
    let fits = f12["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert!(fits.iter().all(|f| f["matches"] == true));
    let svg = fs::read_to_string(dir.join("fig12_heisenberg.svg")).unwrap();
    assert!(svg.matches("stroke-dasharray").count() >= 2);

    let h: Vec<f64> = read_json(&dir.join("fig9b.json"))["h"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["h"].as_f64().unwrap())
        .collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
}
