//! CSV exchange formats for intermediate artifacts: labeled windows and
//! error vectors.

use std::io::{Read, Write};

use crate::bayes::{ErrorDataset, ErrorSplit};
use crate::error::{Error, Result};
use crate::lstm::ErrorVector;
use crate::series::{DatasetSplit, Label, Window};

fn csv_err(row: usize, e: impl ToString) -> Error {
    Error::Csv {
        row,
        message: e.to_string(),
    }
}

fn label_cell(label: Option<Label>) -> String {
    label.map_or_else(String::new, |l| l.as_u8().to_string())
}

fn parse_label(raw: &str, row: usize) -> Result<Option<Label>> {
    match raw.trim() {
        "" => Ok(None),
        s => s
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .map(Some)
            .ok_or_else(|| csv_err(row, format!("bad label '{s}'"))),
    }
}

fn parse_f64(raw: &str, row: usize) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| csv_err(row, format!("bad number '{raw}'")))
}

/// Rows `set,window_id,label,p0,p1,...` for every window of the split.
pub fn write_windows_csv<W: Write>(split: &DatasetSplit, writer: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    out.write_record(["set", "window_id", "label", "points..."])
        .map_err(|e| csv_err(1, e))?;
    let sets = [
        ("normal_train", &split.normal_train),
        ("normal_valid", &split.normal_valid),
        ("normal_test", &split.normal_test),
        ("abnormal_test", &split.abnormal_test),
    ];
    let mut row = 1;
    for (name, windows) in sets {
        for w in windows {
            row += 1;
            let mut rec = vec![name.to_string(), w.source_offset.to_string(), label_cell(w.label)];
            rec.extend(w.points.iter().map(|p| p.to_string()));
            out.write_record(&rec).map_err(|e| csv_err(row, e))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rows `split,window_id,label,e0,e1,...`.
pub fn write_errors_csv<W: Write>(sets: &[&ErrorDataset], writer: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    out.write_record(["split", "window_id", "label", "errors..."])
        .map_err(|e| csv_err(1, e))?;
    let mut row = 1;
    for set in sets {
        let name = match set.split {
            ErrorSplit::Train => "train",
            ErrorSplit::Test => "test",
        };
        for v in &set.vectors {
            row += 1;
            let mut rec = vec![name.to_string(), v.window_id.to_string(), label_cell(v.label)];
            rec.extend(v.errors.iter().map(|e| e.to_string()));
            out.write_record(&rec).map_err(|e| csv_err(row, e))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a file written by [`write_errors_csv`] back into train and test
/// sets. Row numbers in errors are file line numbers.
pub fn read_errors_csv<R: Read>(reader: R) -> Result<(ErrorDataset, ErrorDataset)> {
    let mut input = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, rec) in input.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_err(row, e))?;
        if rec.len() < 4 {
            return Err(csv_err(row, "expected split, window_id, label and errors"));
        }
        let window_id = rec[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| csv_err(row, format!("bad window_id: {e}")))?;
        let vector = ErrorVector {
            errors: rec.iter().skip(3).map(|c| parse_f64(c, row)).collect::<Result<_>>()?,
            label: parse_label(&rec[2], row)?,
            window_id,
        };
        match rec[0].trim() {
            "train" => train.push(vector),
            "test" => test.push(vector),
            other => return Err(csv_err(row, format!("unknown split '{other}'"))),
        }
    }
    Ok((
        ErrorDataset::new(train, ErrorSplit::Train)?,
        ErrorDataset::new(test, ErrorSplit::Test)?,
    ))
}

/// Reads labeled windows written by [`write_windows_csv`] back into a split.
pub fn read_windows_csv<R: Read>(reader: R) -> Result<DatasetSplit> {
    let mut input = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut split = DatasetSplit::default();
    for (i, rec) in input.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_err(row, e))?;
        if rec.len() < 5 {
            return Err(csv_err(row, "expected set, window_id, label and at least two points"));
        }
        let id = rec[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| csv_err(row, format!("bad window_id: {e}")))?;
        let points = rec.iter().skip(3).map(|c| parse_f64(c, row)).collect::<Result<_>>()?;
        let w = Window::new(points, parse_label(&rec[2], row)?, id)?;
        match rec[0].trim() {
            "normal_train" => split.normal_train.push(w),
            "normal_valid" => split.normal_valid.push(w),
            "normal_test" => split.normal_test.push(w),
            "abnormal_test" => split.abnormal_test.push(w),
            other => return Err(csv_err(row, format!("unknown set '{other}'"))),
        }
    }
    Ok(split)
}
