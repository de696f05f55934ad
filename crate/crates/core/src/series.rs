//! Series ingestion and preprocessing: block-mean downsampling, min-max
//! normalization, windowing, autocorrelation and the normal/abnormal split.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A raw scalar sequence with its sampling interval in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_interval: f64,
    name: String,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>, sample_interval: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series has no values".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value at index {i}")));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "sample interval must be positive, got {sample_interval}"
            )));
        }
        Ok(Self {
            values,
            sample_interval,
            name: name.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            sample_interval: self.sample_interval,
            name: self.name.clone(),
        }
    }
}

/// Class label of a window. Abnormal is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Normal = 0,
    Abnormal = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Normal),
            1 => Some(Label::Abnormal),
            _ => None,
        }
    }

    pub fn is_abnormal(self) -> bool {
        self == Label::Abnormal
    }
}

/// A fixed-length subsequence: the unit of training and scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub points: Vec<f64>,
    pub label: Option<Label>,
    pub source_offset: usize,
}

impl Window {
    pub fn new(points: Vec<f64>, label: Option<Label>, source_offset: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidWindow(format!(
                "window length {} is below the minimum of 2",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidWindow("non-finite point".into()));
        }
        Ok(Self {
            points,
            label,
            source_offset,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every point lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.points.iter().all(|p| (0.0..=1.0).contains(p))
    }

    pub fn labeled(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: f64,
    pub max: f64,
}

impl NormalizationParams {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::DegenerateRange(format!("max ({max}) must exceed min ({min})")));
        }
        Ok(Self { min, max })
    }

    /// Min and max over every point of the given windows.
    pub fn fit_windows(windows: &[Window]) -> Result<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for p in windows.iter().flat_map(|w| w.points.iter()) {
            min = min.min(*p);
            max = max.max(*p);
        }
        if windows.is_empty() {
            return Err(Error::EmptyDataset("no windows to fit normalization on".into()));
        }
        Self::new(min, max)
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, x: f64) -> f64 {
        x * (self.max - self.min) + self.min
    }

    /// Maps a window with these parameters, clamping into `[0, 1]`.
    pub fn normalize_window(&self, window: &Window) -> Window {
        Window {
            points: window
                .points
                .iter()
                .map(|&p| self.apply(p).clamp(0.0, 1.0))
                .collect(),
            label: window.label,
            source_offset: window.source_offset,
        }
    }
}

/// Non-overlapping block means; a trailing partial block is dropped.
pub fn downsample(series: &TimeSeries, factor: usize) -> Result<TimeSeries> {
    if factor == 0 || factor > series.len() {
        return Err(Error::InvalidFactor {
            factor,
            len: series.len(),
        });
    }
    let values = series
        .values
        .chunks_exact(factor)
        .map(|block| block.iter().sum::<f64>() / factor as f64)
        .collect();
    let mut out = series.with_values(values);
    out.sample_interval *= factor as f64;
    Ok(out)
}

pub fn minmax_normalize(series: &TimeSeries) -> Result<(TimeSeries, NormalizationParams)> {
    let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::DegenerateRange(format!(
            "series '{}' is constant ({min})",
            series.name
        )));
    }
    let params = NormalizationParams { min, max };
    let values = series
        .values
        .iter()
        .map(|&x| {
            // pin the endpoints so they are attained exactly
            if x == min {
                0.0
            } else if x == max {
                1.0
            } else {
                params.apply(x)
            }
        })
        .collect();
    Ok((series.with_values(values), params))
}

pub fn denormalize(series: &TimeSeries, params: NormalizationParams) -> TimeSeries {
    series.with_values(series.values.iter().map(|&x| params.invert(x)).collect())
}

/// Biased sample autocorrelation at `lag` using the full-series mean.
pub fn acf(series: &TimeSeries, lag: usize) -> Result<f64> {
    acf_values(&series.values, lag)
}

pub fn acf_values(values: &[f64], lag: usize) -> Result<f64> {
    let n = values.len();
    if lag >= n {
        return Err(Error::InvalidLag { lag, len: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateRange("zero-variance series".into()));
    }
    if lag == 0 {
        return Ok(1.0);
    }
    let num: f64 = values
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(num / denom)
}

/// Unlabeled windows of length `window_len` starting every `stride` points.
pub fn make_windows(series: &TimeSeries, window_len: usize, stride: usize) -> Result<Vec<Window>> {
    if window_len < 2 {
        return Err(Error::InvalidWindow(format!("window length {window_len} < 2")));
    }
    if stride == 0 {
        return Err(Error::InvalidWindow("stride must be at least 1".into()));
    }
    if window_len > series.len() {
        return Err(Error::InvalidWindow(format!(
            "window length {window_len} exceeds series length {}",
            series.len()
        )));
    }
    let count = (series.len() - window_len) / stride + 1;
    Ok((0..count)
        .map(|k| {
            let start = k * stride;
            Window {
                points: series.values[start..start + window_len].to_vec(),
                label: None,
                source_offset: start,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.valid, self.test];
        if parts.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Config(format!("split ratios out of range: {parts:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios must sum to 1: {parts:?}")));
        }
        Ok(())
    }

    /// Floors the valid and test sizes; the remainder goes to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let part = |r: f64| ((n as f64 * r) + 1e-9).floor() as usize;
        let valid = part(self.valid);
        let test = part(self.test).min(n - valid);
        (n - valid - test, valid, test)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub normal_train: Vec<Window>,
    pub normal_valid: Vec<Window>,
    pub normal_test: Vec<Window>,
    pub abnormal_test: Vec<Window>,
}

/// Shuffles the normal windows with a seeded RNG and partitions them into
/// train/valid/test; every abnormal window is reserved for testing.
pub fn split_dataset(
    normal: &[Window],
    abnormal: &[Window],
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit> {
    if normal.is_empty() {
        return Err(Error::EmptyDataset("no normal windows to split".into()));
    }
    ratios.validate()?;
    let mut shuffled: Vec<Window> = normal
        .iter()
        .cloned()
        .map(|w| w.labeled(Label::Normal))
        .collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_train, n_valid, _) = ratios.sizes(shuffled.len());
    let normal_test = shuffled.split_off(n_train + n_valid);
    let normal_valid = shuffled.split_off(n_train);
    Ok(DatasetSplit {
        normal_train: shuffled,
        normal_valid,
        normal_test,
        abnormal_test: abnormal
            .iter()
            .cloned()
            .map(|w| w.labeled(Label::Abnormal))
            .collect(),
    })
}

fn parse_timestamp(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs as f64);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(raw, fmt) {
            let utc = dt.and_utc();
            return Some(utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    None
}

/// Reads a `timestamp,value` CSV. Row numbers in errors are file line
/// numbers (the header is line 1).
pub fn read_series_csv<R: Read>(reader: R, name: &str) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv {
        row: 1,
        message: e.to_string(),
    })?;
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != ["timestamp", "value"] {
        return Err(Error::Csv {
            row: 1,
            message: format!("expected header 'timestamp,value', got '{}'", cols.join(",")),
        });
    }
    let mut stamps = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::Csv {
                row,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let ts = parse_timestamp(&rec[0]).ok_or_else(|| Error::Csv {
            row,
            message: format!("unparseable timestamp '{}'", &rec[0]),
        })?;
        let v: f64 = rec[1].trim().parse().map_err(|_| Error::Csv {
            row,
            message: format!("unparseable value '{}'", &rec[1]),
        })?;
        if !v.is_finite() {
            return Err(Error::Csv {
                row,
                message: "value is not finite".into(),
            });
        }
        if let Some(&prev) = stamps.last() {
            if ts <= prev {
                return Err(Error::Csv {
                    row,
                    message: "timestamps must be strictly increasing".into(),
                });
            }
        }
        stamps.push(ts);
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Csv {
            row: 2,
            message: "no data rows".into(),
        });
    }
    let interval = if stamps.len() > 1 {
        (stamps[stamps.len() - 1] - stamps[0]) / (stamps.len() - 1) as f64
    } else {
        1.0
    };
    TimeSeries::new(name, values, interval)
}

pub fn read_series_file(path: &Path) -> Result<TimeSeries> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_series_csv(std::fs::File::open(path)?, &name)
}

/// Writes a `timestamp,value` CSV with integer epoch-second timestamps
/// starting at zero.
pub fn write_series_csv<W: Write>(series: &TimeSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["timestamp", "value"]).map_err(io)?;
    for (i, v) in series.values.iter().enumerate() {
        let ts = (i as f64 * series.sample_interval).round() as i64;
        w.write_record([ts.to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `window_id,label` CSV.
pub fn read_labels_csv<R: Read>(reader: R) -> Result<Vec<(usize, Label)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv {
        row: 1,
        message: e.to_string(),
    })?;
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != ["window_id", "label"] {
        return Err(Error::Csv {
            row: 1,
            message: format!("expected header 'window_id,label', got '{}'", cols.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let bad = |what: &str| Error::Csv {
            row,
            message: format!("unparseable {what}"),
        };
        if rec.len() != 2 {
            return Err(bad("row"));
        }
        let id: usize = rec[0].trim().parse().map_err(|_| bad("window_id"))?;
        let label = rec[1]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .ok_or_else(|| bad("label"))?;
        out.push((id, label));
    }
    Ok(out)
}

pub fn write_labels_csv<W: Write>(labels: &[(usize, Label)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["window_id", "label"]).map_err(io)?;
    for (id, label) in labels {
        w.write_record([id.to_string(), label.as_u8().to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new("t", values.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn series_invariants() {
        assert!(TimeSeries::new("x", vec![], 1.0).is_err());
        assert!(TimeSeries::new("x", vec![1.0, f64::NAN], 1.0).is_err());
        assert!(TimeSeries::new("x", vec![1.0], 0.0).is_err());
    }

    #[test]
    fn downsample_block_means() {
        let out = downsample(&ts(&[2.0, 4.0, 6.0, 8.0]), 2).unwrap();
        assert_eq!(out.values(), &[3.0, 7.0]);
        assert_eq!(out.sample_interval(), 2.0);
        let same = downsample(&ts(&[5.0, 5.0, 5.0]), 1).unwrap();
        assert_eq!(same.values(), &[5.0, 5.0, 5.0]);
        // trailing partial block is dropped
        assert_eq!(downsample(&ts(&[1.0, 2.0, 3.0]), 2).unwrap().values(), &[1.5]);
    }

    #[test]
    fn downsample_rejects_bad_factor() {
        assert!(matches!(
            downsample(&ts(&[1.0, 2.0]), 0),
            Err(Error::InvalidFactor { .. })
        ));
        assert!(matches!(
            downsample(&ts(&[1.0, 2.0]), 3),
            Err(Error::InvalidFactor { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let (out, p) = minmax_normalize(&ts(&[0.0, 5.0, 10.0])).unwrap();
        assert_eq!(out.values(), &[0.0, 0.5, 1.0]);
        assert_eq!((p.min, p.max), (0.0, 10.0));
        let (out, _) = minmax_normalize(&ts(&[2.0, 4.0])).unwrap();
        assert_eq!(out.values(), &[0.0, 1.0]);
        assert!(matches!(
            minmax_normalize(&ts(&[3.0, 3.0])),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn denormalize_examples() {
        let p = NormalizationParams::new(2.0, 4.0).unwrap();
        assert_eq!(denormalize(&ts(&[0.0, 1.0]), p).values(), &[2.0, 4.0]);
        let p = NormalizationParams::new(0.0, 10.0).unwrap();
        assert_eq!(denormalize(&ts(&[0.5]), p).values(), &[5.0]);
        assert!(NormalizationParams::new(1.0, 1.0).is_err());
    }

    #[test]
    fn normalize_window_clamps() {
        let p = NormalizationParams::new(0.0, 2.0).unwrap();
        let w = Window::new(vec![-1.0, 1.0, 3.0], None, 0).unwrap();
        assert_eq!(p.normalize_window(&w).points, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn acf_examples() {
        let alt = ts(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        assert_eq!(acf(&alt, 0).unwrap(), 1.0);
        assert!((acf(&alt, 1).unwrap() + 0.875).abs() < 1e-15);
        assert!(matches!(acf(&alt, 8), Err(Error::InvalidLag { .. })));
        assert!(matches!(
            acf(&ts(&[2.0, 2.0, 2.0]), 1),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn windows_enumerate() {
        let w = make_windows(&ts(&[1.0, 2.0, 3.0, 4.0, 5.0]), 3, 2).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].points, vec![1.0, 2.0, 3.0]);
        assert_eq!(w[1].points, vec![3.0, 4.0, 5.0]);
        assert_eq!(w[1].source_offset, 2);
        assert!(w.iter().all(|w| w.label.is_none()));

        let ten: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(make_windows(&ts(&ten), 10, 1).unwrap().len(), 1);
        assert!(matches!(
            make_windows(&ts(&ten), 11, 1),
            Err(Error::InvalidWindow(_))
        ));
        assert!(make_windows(&ts(&ten), 1, 1).is_err());
    }

    fn windows(n: usize, offset: usize) -> Vec<Window> {
        (0..n)
            .map(|i| Window::new(vec![0.0, 1.0], None, offset + i).unwrap())
            .collect()
    }

    #[test]
    fn split_sizes() {
        let s = split_dataset(&windows(100, 0), &windows(20, 1000), SplitRatios::default(), 1)
            .unwrap();
        assert_eq!(
            (
                s.normal_train.len(),
                s.normal_valid.len(),
                s.normal_test.len(),
                s.abnormal_test.len()
            ),
            (80, 10, 10, 20)
        );
        let s = split_dataset(&windows(10, 0), &[], SplitRatios::default(), 3).unwrap();
        assert_eq!(
            (s.normal_train.len(), s.normal_valid.len(), s.normal_test.len()),
            (8, 1, 1)
        );
        assert!(s.normal_train.iter().all(|w| w.label == Some(Label::Normal)));
    }

    #[test]
    fn split_rounding_enumerated() {
        // floor valid and test, remainder to train
        for n in 1..200usize {
            let (tr, va, te) = SplitRatios::default().sizes(n);
            assert_eq!(va, n / 10, "n={n}");
            assert_eq!(te, n / 10, "n={n}");
            assert_eq!(tr + va + te, n);
        }
    }

    #[test]
    fn split_is_deterministic() {
        let a = split_dataset(&windows(50, 0), &windows(5, 50), SplitRatios::default(), 9).unwrap();
        let b = split_dataset(&windows(50, 0), &windows(5, 50), SplitRatios::default(), 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            split_dataset(&[], &windows(5, 0), SplitRatios::default(), 1),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let text = "timestamp,value\n0,1.5\n60,2.5\n120,3.0\n";
        let s = read_series_csv(text.as_bytes(), "x").unwrap();
        assert_eq!(s.values(), &[1.5, 2.5, 3.0]);
        assert_eq!(s.sample_interval(), 60.0);

        let iso = "timestamp,value\n2020-01-01T00:00:00Z,1\n2020-01-01T00:15:00Z,2\n";
        assert_eq!(read_series_csv(iso.as_bytes(), "x").unwrap().sample_interval(), 900.0);

        let bad = "timestamp,value\n0,1\n60,abc\n";
        match read_series_csv(bad.as_bytes(), "x") {
            Err(Error::Csv { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_series_csv("time,v\n0,1\n".as_bytes(), "x").is_err());

        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).unwrap();
        let back = read_series_csv(buf.as_slice(), "x").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn labels_csv() {
        let labels = vec![(0, Label::Normal), (1, Label::Abnormal)];
        let mut buf = Vec::new();
        write_labels_csv(&labels, &mut buf).unwrap();
        assert_eq!(read_labels_csv(buf.as_slice()).unwrap(), labels);
        assert!(read_labels_csv("window_id,label\n0,2\n".as_bytes()).is_err());
    }
}
