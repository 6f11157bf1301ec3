//! Architectural power traces.
//!
//! A trace is a CSV table with a leading integer time column `t` followed by
//! one column of instantaneous power (watts) per architectural component:
//!
//! ```text
//! t,core0.ialu,core0.fpu
//! 0,0.41,0.12
//! 1,0.39,1.5e-1
//! ```
//!
//! Time indices must advance by exactly one per row. Column order defines the
//! component index order used everywhere downstream.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance labels carried with a trace. None of these affect analysis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    #[serde(default)]
    pub workload: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cores: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<f64>,
}

/// Per-component power time series, indexed `(time step, component)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    components: Vec<String>,
    timestep_s: f64,
    samples: Vec<Vec<f64>>,
    meta: TraceMeta,
}

/// Power attributed to one component, either a time average or a single step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPower {
    pub component: String,
    pub power_w: f64,
}

impl ComponentPower {
    pub fn new(component: impl Into<String>, power_w: f64) -> Self {
        Self {
            component: component.into(),
            power_w,
        }
    }
}

impl PowerTrace {
    /// Builds a trace from rows of samples, checking every invariant.
    pub fn new(
        components: Vec<String>,
        timestep_s: f64,
        samples: Vec<Vec<f64>>,
        meta: TraceMeta,
    ) -> Result<Self> {
        if !(timestep_s > 0.0 && timestep_s.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "timestep must be positive, got {timestep_s}"
            )));
        }
        let mut seen = HashSet::new();
        for c in &components {
            if c.is_empty() {
                return Err(Error::InvalidTrace("empty component identifier".into()));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::InvalidTrace(format!("duplicate component {c:?}")));
            }
        }
        for (row, values) in samples.iter().enumerate() {
            if values.len() != components.len() {
                return Err(Error::InvalidTrace(format!(
                    "row {row} has {} values, expected {}",
                    values.len(),
                    components.len()
                )));
            }
            for (col, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidTrace(format!(
                        "non-finite sample at row {row}, column {:?}",
                        components[col]
                    )));
                }
                if v < 0.0 {
                    return Err(Error::NegativePower {
                        row,
                        column: components[col].clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            components,
            timestep_s,
            samples,
            meta,
        })
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn num_steps(&self) -> usize {
        self.samples.len()
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn timestep_s(&self) -> f64 {
        self.timestep_s
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: TraceMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Sampling period is metadata only; it never enters the averages.
    pub fn with_timestep(mut self, timestep_s: f64) -> Result<Self> {
        if !(timestep_s > 0.0 && timestep_s.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "timestep must be positive, got {timestep_s}"
            )));
        }
        self.timestep_s = timestep_s;
        Ok(self)
    }
}

/// Reads a trace CSV from disk. The workload label defaults to the file stem.
pub fn load_trace(path: impl AsRef<Path>) -> Result<PowerTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let trace = parse_trace(&text, &path.display().to_string())?;
    let workload = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(trace.with_meta(TraceMeta {
        workload,
        ..TraceMeta::default()
    }))
}

/// Parses trace CSV text. `source` only labels error messages.
pub fn parse_trace(text: &str, source: &str) -> Result<PowerTrace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| row_error(source, 1, e.to_string()))?,
        None => {
            return Err(Error::TraceHeader {
                path: source.into(),
                column: 0,
                name: String::new(),
                reason: "missing header line".into(),
            })
        }
    };
    let header_err = |column: usize, name: &str, reason: &str| Error::TraceHeader {
        path: source.into(),
        column,
        name: name.into(),
        reason: reason.into(),
    };
    match header.get(0) {
        Some("t") => {}
        Some(other) => return Err(header_err(0, other, "first column must be `t`")),
        None => return Err(header_err(0, "", "missing header line")),
    }
    let mut components = Vec::with_capacity(header.len().saturating_sub(1));
    let mut seen = HashSet::new();
    for (col, name) in header.iter().enumerate().skip(1) {
        if name.is_empty() {
            return Err(header_err(col, name, "empty component name"));
        }
        if name == "t" {
            return Err(header_err(
                col,
                name,
                "`t` may only appear as the first column",
            ));
        }
        if !seen.insert(name.to_string()) {
            return Err(header_err(col, name, "duplicate component name"));
        }
        components.push(name.to_string());
    }
    if components.is_empty() {
        return Err(header_err(1, "", "no component columns"));
    }

    let mut samples = Vec::new();
    let mut prev_t: Option<i64> = None;
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            row_error(source, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != header.len() {
            return Err(row_error(
                source,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let t_field = &rec[0];
        let t: i64 = t_field.parse().map_err(|_| {
            row_error(
                source,
                line,
                format!("time index {t_field:?} is not an integer"),
            )
        })?;
        if let Some(p) = prev_t {
            if t != p + 1 {
                return Err(row_error(
                    source,
                    line,
                    format!("non-uniform time index {t} after {p}"),
                ));
            }
        }
        prev_t = Some(t);

        let mut row = Vec::with_capacity(components.len());
        for (col, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field.parse().map_err(|_| {
                row_error(
                    source,
                    line,
                    format!(
                        "column {:?}: {field:?} is not a number",
                        components[col - 1]
                    ),
                )
            })?;
            if !v.is_finite() {
                return Err(row_error(
                    source,
                    line,
                    format!("column {:?}: non-finite value", components[col - 1]),
                ));
            }
            if v < 0.0 {
                return Err(Error::NegativePower {
                    row: line,
                    column: components[col - 1].clone(),
                    value: v,
                });
            }
            row.push(v);
        }
        samples.push(row);
    }

    PowerTrace::new(components, 1.0, samples, TraceMeta::default())
}

fn row_error(source: &str, line: usize, reason: String) -> Error {
    Error::TraceRow {
        path: source.into(),
        line,
        reason,
    }
}

/// Time-averaged power per component, `(1/T) Σ_t P_k(t)`.
pub fn average_power(trace: &PowerTrace) -> Result<Vec<ComponentPower>> {
    let steps = trace.num_steps();
    if steps == 0 {
        return Err(Error::Domain("cannot average an empty trace".into()));
    }
    let mut sums = vec![0.0; trace.num_components()];
    for row in trace.samples() {
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(trace
        .components()
        .iter()
        .zip(sums)
        .map(|(c, s)| ComponentPower::new(c.clone(), s / steps as f64))
        .collect())
}

/// Power of every component at one time step.
pub fn per_step_power(trace: &PowerTrace, t: usize) -> Result<Vec<ComponentPower>> {
    let row = trace.samples().get(t).ok_or(Error::Index {
        index: t,
        len: trace.num_steps(),
    })?;
    Ok(trace
        .components()
        .iter()
        .zip(row)
        .map(|(c, &p)| ComponentPower::new(c.clone(), p))
        .collect())
}
