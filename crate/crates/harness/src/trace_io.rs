//! Trace serialization: CSV files with one row per iteration and a JSON
//! summary per run.
//!
//! Numeric fields are written with 17 significant digits so parsing a
//! file and re-serializing it reproduces the bytes exactly.

use std::io::Write;
use std::path::Path;

use fracdim_core::bounds::BoundReport;
use fracdim_core::optim::RunTrace;
use serde::Serialize;

use crate::config::ConfigEcho;

/// 17 significant digits, scientific: round-trips every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_header(trace: &RunTrace<f64>) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for (l, &d) in trace.layer_dims.iter().enumerate() {
        for i in 0..d {
            cols.push(format!("theta_{l}_{i}"));
        }
    }
    if trace.target.is_some() {
        for (l, &d) in trace.layer_dims.iter().enumerate() {
            for i in 0..d {
                cols.push(format!("abs_err_{l}_{i}"));
            }
        }
    }
    cols.push("loss".into());
    for l in 0..trace.layer_dims.len() {
        cols.push(format!("alpha_{l}"));
    }
    let has_sed = trace.records.iter().any(|r| r.sed.is_some());
    if has_sed {
        for l in 0..trace.layer_dims.len() {
            cols.push(format!("sed_{l}"));
        }
        cols.push("d_max".into());
    }
    for l in 0..trace.layer_dims.len() {
        cols.push(format!("eta_{l}"));
    }
    for l in 0..trace.layer_dims.len() {
        cols.push(format!("grad_norm_{l}"));
    }
    cols
}

/// Serializes the full per-iteration trace as CSV (comma-separated,
/// '.' decimal, header row, LF line endings).
pub fn trace_to_csv(trace: &RunTrace<f64>) -> String {
    let has_sed = trace.records.iter().any(|r| r.sed.is_some());
    let mut out = String::new();
    out.push_str(&trace_header(trace).join(","));
    out.push('\n');
    for (k, rec) in trace.records.iter().enumerate() {
        let mut fields = vec![rec.t.to_string()];
        for layer in &trace.estimates[k] {
            for &x in layer {
                fields.push(fmt_f64(x));
            }
        }
        if let Some(errs) = trace.abs_errors_at(k) {
            for layer in &errs {
                for &x in layer {
                    fields.push(fmt_f64(x));
                }
            }
        }
        fields.push(fmt_f64(rec.loss));
        for &a in &rec.alpha {
            fields.push(fmt_f64(a));
        }
        if has_sed {
            match &rec.sed {
                Some(seds) => {
                    for s in seds {
                        fields.push(fmt_f64(s.value));
                    }
                    fields.push(fmt_f64(rec.d_max.unwrap_or(f64::NAN)));
                }
                // bootstrap row: the adaptive path has not run yet
                None => {
                    for _ in 0..trace.layer_dims.len() {
                        fields.push(fmt_f64(f64::NAN));
                    }
                    fields.push(fmt_f64(f64::NAN));
                }
            }
        }
        for &e in &rec.eta {
            fields.push(fmt_f64(e));
        }
        for &g in &rec.grad_norm {
            fields.push(fmt_f64(g));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A parsed trace file: header names plus rows of (t, numeric fields).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

impl TraceFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or("empty trace file")?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let t: u64 = fields
                .next()
                .ok_or_else(|| format!("row {n}: missing t"))?
                .parse()
                .map_err(|e| format!("row {n}: bad t: {e}"))?;
            let values: Vec<f64> = fields
                .map(|f| f.parse::<f64>().map_err(|e| format!("row {n}: {e}")))
                .collect::<Result<_, _>>()?;
            if values.len() + 1 != header.len() {
                return Err(format!(
                    "row {n}: {} fields, header names {}",
                    values.len() + 1,
                    header.len()
                ));
            }
            rows.push((t, values));
        }
        Ok(Self { header, rows })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for (t, values) in &self.rows {
            let mut fields = vec![t.to_string()];
            fields.extend(values.iter().map(|&x| fmt_f64(x)));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        if idx == 0 {
            return Some(self.rows.iter().map(|(t, _)| *t as f64).collect());
        }
        Some(self.rows.iter().map(|(_, v)| v[idx - 1]).collect())
    }
}

/// Per-run summary mirrored into JSON next to the CSV trace.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub seed: u64,
    pub final_estimates: Vec<Vec<f64>>,
    pub final_abs_errors: Option<Vec<Vec<f64>>>,
    pub final_loss: f64,
    pub mean_alpha_last_10pct: Vec<f64>,
    pub sed_min: Option<f64>,
    pub sed_max: Option<f64>,
    pub max_abs_estimate: f64,
    pub bounds: BoundReport,
    pub config: ConfigEcho,
}

impl RunSummary {
    pub fn from_trace(trace: &RunTrace<f64>, bounds: BoundReport, echo: ConfigEcho) -> Self {
        let sed_range = trace.sed_range();
        Self {
            method: trace.method.name().to_string(),
            seed: trace.seed,
            final_estimates: trace.final_estimates().to_vec(),
            final_abs_errors: trace.final_abs_errors(),
            final_loss: trace.records.last().expect("nonempty trace").loss,
            mean_alpha_last_10pct: trace.mean_alpha_tail(0.10),
            sed_min: sed_range.map(|(lo, _)| lo),
            sed_max: sed_range.map(|(_, hi)| hi),
            max_abs_estimate: trace.max_abs_estimate(),
            bounds,
            config: echo,
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
