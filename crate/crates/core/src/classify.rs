//! Relative-activity classification of tiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::{TileGeometry, TileGrid};

/// Activity class of a tile. Ordered `Idle < Low < Medium < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TileClass {
    #[serde(rename = "I")]
    Idle,
    #[serde(rename = "L")]
    Low,
    #[serde(rename = "M")]
    Medium,
    #[serde(rename = "H")]
    High,
}

impl TileClass {
    pub fn code(self) -> char {
        match self {
            TileClass::Idle => 'I',
            TileClass::Low => 'L',
            TileClass::Medium => 'M',
            TileClass::High => 'H',
        }
    }
}

impl fmt::Display for TileClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TileClass::Idle => "Idle",
            TileClass::Low => "Low",
            TileClass::Medium => "Medium",
            TileClass::High => "High",
        };
        f.write_str(name)
    }
}

/// Normalized-power class boundaries, `0 < t_med < t_high < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_high: f64,
    pub t_med: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            t_high: 0.5,
            t_med: 0.25,
        }
    }
}

impl Thresholds {
    pub fn new(t_high: f64, t_med: f64) -> Result<Self> {
        let th = Thresholds { t_high, t_med };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.t_med && self.t_med < self.t_high && self.t_high < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "thresholds must satisfy 0 < t_med < t_high < 1, got t_med = {}, t_high = {}",
                self.t_med, self.t_high
            )))
        }
    }

    /// Class of a normalized power value in `[0, 1]`. High and Medium include
    /// their lower boundary.
    pub fn class_of(&self, p: f64) -> TileClass {
        if p >= self.t_high {
            TileClass::High
        } else if p >= self.t_med {
            TileClass::Medium
        } else if p > 0.0 {
            TileClass::Low
        } else {
            TileClass::Idle
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMap {
    pub nx: usize,
    pub ny: usize,
    pub p_max_w: f64,
    /// Row-major, same numbering as the tile grid.
    pub classes: Vec<TileClass>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassHistogram {
    pub high: usize,
    pub medium: usize,
    pub low: usize,
    pub idle: usize,
}

impl ClassMap {
    pub fn histogram(&self) -> ClassHistogram {
        let mut h = ClassHistogram::default();
        for c in &self.classes {
            match c {
                TileClass::High => h.high += 1,
                TileClass::Medium => h.medium += 1,
                TileClass::Low => h.low += 1,
                TileClass::Idle => h.idle += 1,
            }
        }
        h
    }

    pub fn matches(&self, geom: &TileGeometry) -> bool {
        self.nx == geom.nx && self.ny == geom.ny && self.classes.len() == geom.len()
    }
}

/// Normalizes tile powers by the largest tile power and labels each tile.
/// An all-zero map labels every tile Idle.
pub fn classify(tiles: &TileGrid, th: &Thresholds) -> Result<ClassMap> {
    th.validate()?;
    if tiles.tiles.is_empty() {
        return Err(Error::Domain("no tiles to classify".into()));
    }
    if let Some(t) = tiles
        .tiles
        .iter()
        .find(|t| !(t.power_w >= 0.0) || !t.power_w.is_finite())
    {
        return Err(Error::Domain(format!(
            "tile power must be finite and non-negative, got {}",
            t.power_w
        )));
    }
    let p_max = tiles.tiles.iter().map(|t| t.power_w).fold(0.0, f64::max);
    let p: Vec<f64> = if p_max > 0.0 {
        tiles.tiles.iter().map(|t| t.power_w / p_max).collect()
    } else {
        vec![0.0; tiles.tiles.len()]
    };
    let classes = p.iter().map(|&v| th.class_of(v)).collect();
    Ok(ClassMap {
        nx: tiles.geometry.nx,
        ny: tiles.geometry.ny,
        p_max_w: p_max,
        classes,
        p,
    })
}
