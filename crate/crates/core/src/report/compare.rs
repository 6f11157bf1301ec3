use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisReport;
use crate::error::{Error, Result};

/// One metric of two reports side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub metric: String,
    pub a: f64,
    pub b: f64,
}

impl DeltaRow {
    pub fn delta(&self) -> f64 {
        self.b - self.a
    }
}

impl fmt::Display for DeltaRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<32} {:>14.6e} {:>14.6e} {:>+14.6e}",
            self.metric,
            self.a,
            self.b,
            self.delta()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub rows: Vec<DeltaRow>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a: {}", self.a)?;
        writeln!(f, "b: {}", self.b)?;
        writeln!(
            f,
            "{:<32} {:>14} {:>14} {:>14}",
            "metric", "a", "b", "b - a"
        )?;
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

type Metric = (&'static str, fn(&AnalysisReport) -> f64);

/// Compares two reports computed on the same tile grid.
pub fn compare(a: &AnalysisReport, b: &AnalysisReport) -> Result<Comparison> {
    if a.geometry != b.geometry {
        return Err(Error::Comparison(format!(
            "reports use different tile grids ({}x{} vs {}x{})",
            a.geometry.nx, a.geometry.ny, b.geometry.nx, b.geometry.ny
        )));
    }
    let metrics: [Metric; 12] = [
        ("tile_power_total_w", |r| r.tiles.total_power_w),
        ("tile_power_max_w", |r| r.tiles.max_tile_power_w),
        ("tiles_high", |r| r.classes.high as f64),
        ("tiles_medium", |r| r.classes.medium as f64),
        ("tiles_low", |r| r.classes.low as f64),
        ("adaptive_metal_area_um2", |r| r.adaptive.metal_area_um2),
        ("uniform_metal_area_um2", |r| r.uniform.metal_area_um2),
        ("reduction_pct", |r| r.reduction_pct),
        ("adaptive_worst_ir_drop_v", |r| r.adaptive.worst_ir_drop_v),
        ("uniform_worst_ir_drop_v", |r| r.uniform.worst_ir_drop_v),
        ("adaptive_ir_violations", |r| {
            r.adaptive.ir_violations as f64
        }),
        ("adaptive_em_violations", |r| {
            r.adaptive.em_violations as f64
        }),
    ];
    Ok(Comparison {
        a: a.scenario.workload.clone(),
        b: b.scenario.workload.clone(),
        rows: metrics
            .iter()
            .map(|(name, get)| DeltaRow {
                metric: (*name).to_string(),
                a: get(a),
                b: get(b),
            })
            .collect(),
    })
}
