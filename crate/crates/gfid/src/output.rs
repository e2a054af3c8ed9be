//! CSV output and per-cell summaries.

use std::io::Write;
use std::path::Path;

use crate::runner::ResultRow;

pub const HEADER: [&str; 10] =
    ["scenario", "setting", "k", "sigma", "trial", "seed", "error", "success", "diag", "wall_ms"];

pub fn write_csv<W: Write>(scenario: &str, rows: &[ResultRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            scenario.to_string(),
            r.setting.clone(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.sigma.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.error.map(|e| e.to_string()).unwrap_or_default(),
            r.success.to_string(),
            r.diag.clone(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()
}

pub fn emit_csv(scenario: &str, rows: &[ResultRow], path: impl AsRef<Path>) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(scenario, rows, std::io::BufWriter::new(file))
}

pub fn to_csv_string(scenario: &str, rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(scenario, rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub setting: String,
    pub k: Option<usize>,
    pub sigma: f64,
    pub trials: usize,
    pub success_rate: f64,
    /// Median error, with unfinished trials counted as infinite.
    pub median_error: f64,
    pub mean_error: f64,
    pub failed: usize,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    }
}

/// Rows are grouped by consecutive (setting, k, σ), the order the runner emits.
pub fn summarize(rows: &[ResultRow]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let key = (&rows[i].setting, rows[i].k, rows[i].sigma.to_bits());
        let mut j = i;
        while j < rows.len() && (&rows[j].setting, rows[j].k, rows[j].sigma.to_bits()) == key {
            j += 1;
        }
        let cell = &rows[i..j];
        let mut errors: Vec<f64> = cell.iter().map(|r| r.error.unwrap_or(f64::INFINITY)).collect();
        let finished: Vec<f64> = cell.iter().filter_map(|r| r.error).collect();
        out.push(CellSummary {
            setting: rows[i].setting.clone(),
            k: rows[i].k,
            sigma: rows[i].sigma,
            trials: cell.len(),
            success_rate: cell.iter().filter(|r| r.success).count() as f64 / cell.len() as f64,
            median_error: median(&mut errors),
            mean_error: finished.iter().sum::<f64>() / finished.len().max(1) as f64,
            failed: cell.len() - finished.len(),
        });
        i = j;
    }
    out
}
