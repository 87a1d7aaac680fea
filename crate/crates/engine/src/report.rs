//! Sweep reports as TSV (`value`, `loss`, `ratio`) or JSON.

use std::fmt::Write as _;

use nca_core::analysis::{SweepEntry, SweepReport};
use serde::Serialize;

pub fn to_tsv(report: &SweepReport) -> String {
    let mut out = String::from("value\tloss\tratio\n");
    for e in &report.entries {
        // `{}` on f64 prints the shortest representation that round-trips
        let _ = writeln!(out, "{}\t{}\t{}", e.value, e.loss, e.ratio);
    }
    out
}

#[derive(Serialize)]
struct JsonEntry {
    value: f64,
    loss: f64,
    ratio: f64,
    height: usize,
    width: usize,
    dt: f64,
    steps: u64,
}

impl From<&SweepEntry> for JsonEntry {
    fn from(e: &SweepEntry) -> Self {
        Self {
            value: e.value,
            loss: e.loss,
            ratio: e.ratio,
            height: e.height,
            width: e.width,
            dt: e.dt,
            steps: e.steps,
        }
    }
}

#[derive(Serialize)]
struct JsonReport {
    axis: &'static str,
    duration: f64,
    base_height: usize,
    base_width: usize,
    reference_loss: f64,
    seed_epsilon: f64,
    seed_rng: u64,
    stochastic_mask: bool,
    mask_rng_seed: u64,
    entries: Vec<JsonEntry>,
}

pub fn to_json(report: &SweepReport) -> String {
    let doc = JsonReport {
        axis: report.axis.name(),
        duration: report.duration,
        base_height: report.base_shape.height,
        base_width: report.base_shape.width,
        reference_loss: report.reference_loss,
        seed_epsilon: report.seed.epsilon,
        seed_rng: report.seed.rng_seed,
        stochastic_mask: report.stochastic_mask,
        mask_rng_seed: report.mask_rng_seed,
        entries: report.entries.iter().map(JsonEntry::from).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// JSON when `path` ends in `.json`, TSV otherwise.
pub fn render_for_path(report: &SweepReport, path: &std::path::Path) -> String {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => to_json(report),
        _ => to_tsv(report),
    }
}
