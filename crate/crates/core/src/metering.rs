//! Step instrumentation and per-pull delay reports.
//!
//! Delay is measured in instrumented steps, never in wall-clock time. A step
//! is one adjacency arc examined, one queue push or pop, one lazy-array read
//! or write, one heap key comparison, or one iteration of a cursor loop.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::enumerators::{DistanceTriple, EnumError, Enumerator};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepCounter {
    total: u64,
    last_emit_mark: u64,
    lazy_cells: u64,
}

impl StepCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn step(&mut self) {
        self.total += 1;
    }

    #[inline]
    pub fn add(&mut self, steps: u64) {
        self.total += steps;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Starts a new delay window.
    pub fn mark(&mut self) {
        self.last_emit_mark = self.total;
    }

    /// Steps spent since the last [`mark`](Self::mark).
    #[inline]
    pub fn since_mark(&self) -> u64 {
        self.total - self.last_emit_mark
    }

    /// Tally of lazy-array cells allocated through this counter. Not a step.
    pub fn lazy_cells(&self) -> u64 {
        self.lazy_cells
    }

    pub(crate) fn note_lazy_cells(&mut self, cells: u64) {
        self.lazy_cells += cells;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayReport {
    pub variant: String,
    /// Pulls made, including the final end-of-stream pull.
    pub pulls: u64,
    pub outputs: u64,
    pub max_delay: u64,
    pub total_delay_steps: u64,
    pub mean_delay: f64,
    pub per_phase_max: BTreeMap<String, u64>,
    pub declared_bound_value: u64,
    pub bound_violations: u64,
    pub bound_base: f64,
    pub fitted_constant: f64,
    pub preprocessing_steps: u64,
    pub peak_queue: usize,
    pub lazy_cells_allocated: u64,
    pub n: usize,
    pub m: usize,
}

impl DelayReport {
    /// Flat `key=value` block, one field per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// One JSON object per field, one per line.
    pub fn to_records(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (field, value) in map {
                let rec = serde_json::json!({ "field": field, "value": value });
                let _ = writeln!(out, "{rec}");
            }
        }
        out
    }

    fn fields(&self) -> Vec<(String, String)> {
        let mut f = vec![
            ("variant".to_string(), self.variant.clone()),
            ("n".into(), self.n.to_string()),
            ("m".into(), self.m.to_string()),
            ("pulls".into(), self.pulls.to_string()),
            ("outputs".into(), self.outputs.to_string()),
            ("max_delay".into(), self.max_delay.to_string()),
            (
                "total_delay_steps".into(),
                self.total_delay_steps.to_string(),
            ),
            ("mean_delay".into(), format!("{:.4}", self.mean_delay)),
            (
                "declared_bound_value".into(),
                self.declared_bound_value.to_string(),
            ),
            ("bound_violations".into(), self.bound_violations.to_string()),
            ("bound_base".into(), format!("{:.4}", self.bound_base)),
            (
                "fitted_constant".into(),
                format!("{:.4}", self.fitted_constant),
            ),
            (
                "preprocessing_steps".into(),
                self.preprocessing_steps.to_string(),
            ),
            ("peak_queue".into(), self.peak_queue.to_string()),
            (
                "lazy_cells_allocated".into(),
                self.lazy_cells_allocated.to_string(),
            ),
        ];
        for (phase, max) in &self.per_phase_max {
            f.push((format!("phase_max.{phase}"), max.to_string()));
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("reports and bound bases differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no reports to fit")]
    Empty,
    #[error("bound base at position {0} is zero")]
    ZeroBase(usize),
}

/// Maximum over runs of `max_delay / base`.
pub fn fit_bound(reports: &[DelayReport], bound_base_values: &[f64]) -> Result<f64, FitError> {
    if reports.len() != bound_base_values.len() {
        return Err(FitError::LengthMismatch(
            reports.len(),
            bound_base_values.len(),
        ));
    }
    if reports.is_empty() {
        return Err(FitError::Empty);
    }
    let mut best = 0.0f64;
    for (i, (r, &base)) in reports.iter().zip(bound_base_values).enumerate() {
        if base == 0.0 {
            return Err(FitError::ZeroBase(i));
        }
        best = best.max(r.max_delay as f64 / base);
    }
    Ok(best)
}

/// Drains `enumerator`, handing every triple to `sink`, and reports delays.
pub fn run_metered_with(
    enumerator: &mut Enumerator,
    mut sink: impl FnMut(DistanceTriple),
) -> Result<DelayReport, EnumError> {
    let mut pulls = 0u64;
    let mut outputs = 0u64;
    let mut max_delay = 0u64;
    let mut total = 0u64;
    let mut declared = 0u64;
    let mut per_phase: BTreeMap<String, u64> = BTreeMap::new();
    loop {
        let item = enumerator.pull()?;
        let stats = enumerator.last_pull();
        pulls += 1;
        max_delay = max_delay.max(stats.steps);
        total += stats.steps;
        declared = declared.max(stats.declared_bound);
        let slot = per_phase.entry(stats.phase.to_string()).or_default();
        *slot = (*slot).max(stats.steps);
        match item {
            Some(t) => {
                outputs += 1;
                sink(t);
            }
            None => break,
        }
    }
    let base = enumerator.bound_base();
    let graph = enumerator.graph();
    Ok(DelayReport {
        variant: enumerator.variant().to_string(),
        pulls,
        outputs,
        max_delay,
        total_delay_steps: total,
        mean_delay: total as f64 / pulls as f64,
        per_phase_max: per_phase,
        declared_bound_value: declared,
        bound_violations: enumerator.bound_violations(),
        bound_base: base,
        fitted_constant: max_delay as f64 / base.max(1.0),
        preprocessing_steps: enumerator.preprocessing_steps(),
        peak_queue: enumerator.peak_queue(),
        lazy_cells_allocated: enumerator.lazy_cells(),
        n: graph.n(),
        m: graph.m(),
    })
}

/// Drains `enumerator` and returns its output together with a delay report.
pub fn run_metered(
    enumerator: &mut Enumerator,
) -> Result<(Vec<DistanceTriple>, DelayReport), EnumError> {
    let mut out = Vec::new();
    let report = run_metered_with(enumerator, |t| out.push(t))?;
    Ok((out, report))
}
