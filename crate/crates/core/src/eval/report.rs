//! Report artifacts: the metric CSV (`metric, window, seed, value`),
//! energy-series CSVs (`t, E_FOM, E_ROM`), and the text summary.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct MetricRow {
    pub metric: String,
    pub window: String,
    /// Seed label; `-` for deterministic quantities.
    pub seed: String,
    pub value: f64,
}

impl MetricRow {
    pub fn new(metric: &str, window: &str, seed: &str, value: f64) -> Self {
        MetricRow {
            metric: metric.to_string(),
            window: window.to_string(),
            seed: seed.to_string(),
            value,
        }
    }
}

pub fn write_metrics_csv(rows: &[MetricRow], path: &Path, manifest: &str) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::new();
    if !manifest.is_empty() {
        out.push_str(&format!("# {manifest}\n"));
    }
    out.push_str("metric,window,seed,value\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.16e}\n",
            row.metric, row.window, row.seed, row.value
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(display, e))
}

pub fn write_energy_csv<T: Real>(
    times: &[T],
    e_fom: &[T],
    e_rom: &[T],
    path: &Path,
    manifest: &str,
) -> Result<()> {
    let display = path.display().to_string();
    if times.len() != e_fom.len() || times.len() != e_rom.len() {
        return Err(Error::Dimension {
            context: "energy series lengths",
            expected: times.len(),
            actual: e_fom.len().min(e_rom.len()),
        });
    }
    let mut out = String::new();
    if !manifest.is_empty() {
        out.push_str(&format!("# {manifest}\n"));
    }
    out.push_str("t,E_FOM,E_ROM\n");
    for i in 0..times.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            times[i].as_f64(),
            e_fom[i].as_f64(),
            e_rom[i].as_f64()
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(display, e))
}

/// Aggregates per-term occurrence counts over independent runs into
/// (mean, sample standard deviation). Terms absent from a run count zero.
pub fn occurrence_statistics(
    per_run_counts: &[BTreeMap<String, usize>],
) -> BTreeMap<String, (f64, f64)> {
    let mut terms: Vec<String> = Vec::new();
    for counts in per_run_counts {
        for term in counts.keys() {
            if !terms.contains(term) {
                terms.push(term.clone());
            }
        }
    }
    let runs = per_run_counts.len();
    let mut out = BTreeMap::new();
    for term in terms {
        let values: Vec<f64> = per_run_counts
            .iter()
            .map(|counts| counts.get(&term).copied().unwrap_or(0) as f64)
            .collect();
        let mean = values.iter().sum::<f64>() / runs as f64;
        let std = if runs < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (runs - 1) as f64).sqrt()
        };
        out.insert(term, (mean, std));
    }
    out
}
