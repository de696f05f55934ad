use std::path::{Path, PathBuf};

use super::experiment::{ExperimentReport, MethodResult, TrainedModels};
use super::persist::save_model;
use crate::error::Result;

pub const METRICS_HEADER: &str = "method,accuracy,precision,recall,f1";

fn cells(r: &MethodResult) -> [String; 4] {
    let m = &r.metrics;
    [m.accuracy, m.precision, m.recall, m.f_beta].map(|v| format!("{v:.3}"))
}

/// One row per method with metrics at three decimals.
pub fn metrics_csv(report: &ExperimentReport) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in &report.results {
        out.push_str(&format!("{},{}\n", r.method, cells(r).join(",")));
    }
    out
}

/// Plain-text table: dataset, method, accuracy, precision, recall, F1.
pub fn metrics_table(reports: &[&ExperimentReport]) -> String {
    let header = ["Dataset", "Method", "Accuracy", "Precision", "Recall", "F1"];
    let mut rows: Vec<[String; 6]> = Vec::new();
    for rep in reports {
        for r in &rep.results {
            let [a, p, rc, f] = cells(r);
            rows.push([rep.dataset.clone(), r.method.to_string(), a, p, rc, f]);
        }
    }
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cols: &[String]| -> String {
        let parts: Vec<String> = cols
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header.map(String::from));
    out.push_str(&line(&widths.map(|w| "-".repeat(w))));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

/// Writes `report.txt`, `metrics.csv`, `report.json` and one
/// `history_<model>.csv` per trained model. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("report.txt".into(), metrics_table(&[report]))?;
    put("metrics.csv".into(), metrics_csv(report))?;
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    put("report.json".into(), json)?;
    for (name, hist) in &report.histories {
        put(format!("history_{name}.csv"), hist.to_csv())?;
    }
    Ok(written)
}

/// Writes every trained model as a versioned JSON file.
pub fn save_models(models: &TrainedModels, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = ["normalization", "predictor", "nb", "lstm_nn", "mlp"]
        .iter()
        .map(|n| dir.join(format!("{n}.json")))
        .collect();
    save_model(&models.normalization, &paths[0])?;
    save_model(&models.predictor, &paths[1])?;
    save_model(&models.nb, &paths[2])?;
    save_model(&models.lstm_nn, &paths[3])?;
    save_model(&models.mlp, &paths[4])?;
    Ok(paths)
}
