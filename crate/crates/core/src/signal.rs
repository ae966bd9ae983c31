//! Core signal types, CSV ingestion and profile construction.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{mean, Real};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T = f64> {
    samples: Vec<T>,
    sample_rate: T,
    label: String,
    t0: T,
}

impl<T: Real> TimeSeries<T> {
    /// Builds a validated series: at least two finite samples, positive rate.
    pub fn new(samples: Vec<T>, sample_rate: T) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > T::zero()) {
            return Err(Error::Validation(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::Validation(format!("need N >= 2 samples, got {}", samples.len())));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("sample {i} is not finite ({})", samples[i])));
        }
        Ok(Self {
            samples,
            sample_rate,
            label: String::new(),
            t0: T::zero(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_t0(mut self, t0: T) -> Self {
        self.t0 = t0;
        self
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn dt(&self) -> T {
        T::one() / self.sample_rate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time stamp of sample `i` in seconds.
    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize_lossy(i) / self.sample_rate
    }

    pub fn mean(&self) -> T {
        mean(&self.samples)
    }

    /// Same metadata, new samples (validated).
    pub fn map_samples(&self, samples: Vec<T>) -> Result<Self> {
        Ok(Self::new(samples, self.sample_rate)?
            .with_label(self.label.clone())
            .with_t0(self.t0))
    }

    /// First differences `x[i+1] - x[i]`.
    pub fn diff(&self) -> Result<Self> {
        let d = self.samples.windows(2).map(|w| w[1] - w[0]).collect();
        self.map_samples(d)
    }
}

/// Mean-subtracted cumulative sum of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T = f64> {
    values: Vec<T>,
    source_mean: T,
}

impl<T: Real> Profile<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_mean(&self) -> T {
        self.source_mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wraps an already-integrated path (for example a Brownian walk) as a
    /// profile: the profile of its increments, so `values[i] = x[i+1] - x[0]`
    /// minus the mean drift.
    pub fn of_walk(walk: &TimeSeries<T>) -> Result<Self> {
        let inc = walk.diff()?;
        Ok(profile(&inc))
    }
}

/// `Y[i] = Σ_{t<=i} (x_t - mean(x))`, 0-based.
pub fn profile<T: Real>(x: &TimeSeries<T>) -> Profile<T> {
    let m = x.mean();
    let mut acc = T::zero();
    let values = x
        .samples()
        .iter()
        .map(|&v| {
            acc = acc + (v - m);
            acc
        })
        .collect();
    Profile { values, source_mean: m }
}

/// Subtracts the sample mean.
pub fn detrend_mean<T: Real>(x: &TimeSeries<T>) -> TimeSeries<T> {
    let m = x.mean();
    let mut out: Vec<T> = x.samples().iter().map(|&v| v - m).collect();
    // second pass removes the rounding residue of the first
    let r = mean(&out);
    out.iter_mut().for_each(|v| *v = *v - r);
    x.map_samples(out).expect("mean removal keeps samples finite")
}

/// Column layout of a CSV input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvLayout {
    /// Zero-based index of the value column.
    pub column: usize,
    /// Zero-based index of a time column, when present.
    pub time_column: Option<usize>,
    /// Skip the first record.
    pub header: bool,
}

/// Maximum tolerated deviation of a sampling interval from the nominal one.
pub const MAX_PERIOD_DEVIATION: f64 = 0.01;

/// Loads column `column` of a header-less CSV file sampled at `sample_rate`.
pub fn load_csv<T: Real>(path: &Path, sample_rate: T, column: usize) -> Result<TimeSeries<T>> {
    let layout = CsvLayout {
        column,
        ..CsvLayout::default()
    };
    load_csv_with(path, Some(sample_rate), &layout)
}

/// Loads a CSV file. With a time column the rate is inferred from the time
/// stamps (and must match `sample_rate` if both are given); without one
/// `sample_rate` is required.
pub fn load_csv_with<T: Real>(path: &Path, sample_rate: Option<T>, layout: &CsvLayout) -> Result<TimeSeries<T>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_csv(&text, sample_rate, layout)
}

pub fn parse_csv<T: Real>(text: &str, sample_rate: Option<T>, layout: &CsvLayout) -> Result<TimeSeries<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(layout.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let first_row = if layout.header { 2 } else { 1 };
    let mut values = Vec::new();
    let mut times = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let row = first_row + k;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        values.push(parse_field::<T>(&rec, layout.column, row)?);
        if let Some(tc) = layout.time_column {
            times.push(parse_field::<T>(&rec, tc, row)?);
        }
    }

    let rate = match (layout.time_column, sample_rate) {
        (Some(_), given) => {
            let inferred = rate_from_times(&times)?;
            if let Some(r) = given {
                let rel = ((r - inferred) / r).abs();
                if rel > T::c(MAX_PERIOD_DEVIATION) {
                    return Err(Error::Validation(format!(
                        "given rate {r} disagrees with time stamps ({inferred})"
                    )));
                }
            }
            inferred
        }
        (None, Some(r)) => r,
        (None, None) => return Err(Error::Validation("sample rate required for a bare value column".into())),
    };
    let t0 = times.first().copied().unwrap_or_else(T::zero);
    Ok(TimeSeries::new(values, rate)?.with_t0(t0))
}

fn parse_field<T: Real>(rec: &csv::StringRecord, col: usize, row: usize) -> Result<T> {
    let field = rec.get(col).ok_or_else(|| Error::Parse {
        row,
        message: format!("missing column {col}"),
    })?;
    let v: T = field.parse().map_err(|_| Error::Parse {
        row,
        message: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Validation(format!("non-finite sample at row {row}: {field}")));
    }
    Ok(v)
}

fn rate_from_times<T: Real>(times: &[T]) -> Result<T> {
    if times.len() < 2 {
        return Err(Error::Validation(format!("need N >= 2 samples, got {}", times.len())));
    }
    let span = times[times.len() - 1] - times[0];
    let nominal = span / T::from_usize_lossy(times.len() - 1);
    if nominal <= T::zero() {
        return Err(Error::Validation("time stamps must increase".into()));
    }
    let tol = nominal * T::c(MAX_PERIOD_DEVIATION);
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - nominal).abs() > tol {
            return Err(Error::Validation(format!(
                "non-uniform sampling between rows {} and {}",
                i + 1,
                i + 2
            )));
        }
    }
    Ok(T::one() / nominal)
}

/// Writes one value per line using the shortest round-trip representation.
pub fn write_csv<T: Real, W: Write>(x: &TimeSeries<T>, mut out: W) -> Result<()> {
    for v in x.samples() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Writes `(time, value)` pairs with a header row.
pub fn write_timed_csv<T: Real, W: Write>(x: &TimeSeries<T>, mut out: W) -> Result<()> {
    writeln!(out, "time,value")?;
    for (i, v) in x.samples().iter().enumerate() {
        writeln!(out, "{},{v}", x.time(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_series() {
        assert!(TimeSeries::new(vec![1.0], 1.0).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(TimeSeries::new(vec![1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn profile_of_alternating_series() {
        let p = profile(&ts(&[1.0, -1.0, 1.0, -1.0]));
        assert_eq!(p.values(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn profile_of_constant_is_zero() {
        let p = profile(&ts(&[2.5, 2.5, 2.5]));
        assert_eq!(p.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(p.source_mean(), 2.5);
    }

    #[test]
    fn detrend_examples() {
        assert_eq!(detrend_mean(&ts(&[2.0, 4.0])).samples(), &[-1.0, 1.0]);
        assert_eq!(detrend_mean(&ts(&[0.0, 0.0, 0.0])).samples(), &[0.0; 3]);
    }

    #[test]
    fn csv_bare_column() {
        let x: TimeSeries = parse_csv("1.0\n2.0\n3.0\n", Some(100.0), &CsvLayout::default()).unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(x.sample_rate(), 100.0);
        assert_eq!(x.samples(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_malformed_row_reports_row() {
        let err = parse_csv::<f64>("abc\n", Some(1.0), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err:?}");
        let err = parse_csv::<f64>("1\n2\nx\n", Some(1.0), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err:?}");
    }

    #[test]
    fn csv_empty_file_is_invalid() {
        let err = parse_csv::<f64>("", Some(1.0), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn csv_nan_is_validation_error() {
        let err = parse_csv::<f64>("1\nNaN\n", Some(1.0), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn csv_time_value_pairs() {
        let layout = CsvLayout {
            column: 1,
            time_column: Some(0),
            header: true,
        };
        let x: TimeSeries = parse_csv("t,v\n0.0,1\n0.01,2\n0.02,3\n", None, &layout).unwrap();
        assert!((x.sample_rate() - 100.0).abs() < 1e-9);
        assert_eq!(x.samples(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_rejects_jittered_times() {
        let layout = CsvLayout {
            column: 1,
            time_column: Some(0),
            header: false,
        };
        let err = parse_csv::<f64>("0,1\n0.01,2\n0.025,3\n0.03,4\n", None, &layout).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn csv_without_rate_fails() {
        assert!(parse_csv::<f64>("1\n2\n", None, &CsvLayout::default()).is_err());
    }

    #[test]
    fn zero_mean_check() {
        let d = detrend_mean(&ts(&[3.0, 9.5, -1.25, 7.0, 1e3]));
        let peak = d.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(mean(d.samples()).abs() <= 1e-12 * peak);
    }

    #[test]
    fn walk_profile_removes_drift() {
        let walk = ts(&[0.0, 1.0, 2.0, 3.0]);
        let p = Profile::of_walk(&walk).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-15));
    }
}
