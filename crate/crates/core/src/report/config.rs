use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::Thresholds;
use crate::electrical::{PadSpec, SolveOptions, TechParams};
use crate::error::{Error, Result};
use crate::floorplan::Floorplan;
use crate::gridgen::WireWidths;

/// Which tile powers drive the adaptive grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    #[default]
    Average,
    Peak,
}

impl std::str::FromStr for PowerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "average" | "avg" => Ok(PowerMode::Average),
            "peak" => Ok(PowerMode::Peak),
            other => Err(format!("unknown mode {other:?}, expected average or peak")),
        }
    }
}

impl std::fmt::Display for PowerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PowerMode::Average => "average",
            PowerMode::Peak => "peak",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub nx: usize,
    pub ny: usize,
}

impl Default for Tiling {
    fn default() -> Self {
        Tiling { nx: 16, ny: 16 }
    }
}

impl std::str::FromStr for Tiling {
    type Err = String;

    /// Parses `NXxNY`, e.g. `16x16`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("tiling {s:?} is not of the form NXxNY"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("tiling {s:?} is not of the form NXxNY"))
        };
        Ok(Tiling {
            nx: parse(a)?,
            ny: parse(b)?,
        })
    }
}

/// Labels attached to the trace; they flow into the report unchanged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetaConfig {
    #[serde(default)]
    pub workload: Option<String>,
    #[serde(default)]
    pub cores: Option<u32>,
    #[serde(default)]
    pub temperature_c: Option<f64>,
    #[serde(default)]
    pub timestep_s: Option<f64>,
}

fn default_k() -> usize {
    2
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// One analysis run. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trace: PathBuf,
    pub floorplan: PathBuf,
    /// JSON list of `[x, y]` pad locations; pads default to the die corners.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pads: Option<PathBuf>,
    #[serde(default)]
    pub tiling: Tiling,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_k")]
    pub k: usize,
    pub pitch_um: f64,
    #[serde(default)]
    pub tech: TechParams,
    #[serde(default)]
    pub widths: WireWidths,
    #[serde(default)]
    pub mode: PowerMode,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub meta: MetaConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.trace);
        fix(&mut self.floorplan);
        if let Some(p) = self.pads.as_mut() {
            fix(p);
        }
        fix(&mut self.out);
    }

    /// Checks every downstream precondition that can be checked up front and
    /// reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.tiling.nx == 0 || self.tiling.ny == 0 {
            problems.push(format!(
                "tiling must be at least 1x1, got {}x{}",
                self.tiling.nx, self.tiling.ny
            ));
        }
        if let Err(e) = self.thresholds.validate() {
            problems.push(e.to_string());
        }
        if self.k == 0 {
            problems.push("k must be at least 1".into());
        }
        if !(self.pitch_um > 0.0 && self.pitch_um.is_finite()) {
            problems.push(format!("pitch_um must be positive, got {}", self.pitch_um));
        }
        if let Err(Error::Config(p)) = self.tech.validate() {
            problems.extend(p);
        }
        if !(self.widths.horizontal_um > 0.0 && self.widths.vertical_um > 0.0) {
            problems.push("wire widths must be positive".into());
        }
        if !(self.solver.tol > 0.0) {
            problems.push(format!(
                "solver.tol must be positive, got {}",
                self.solver.tol
            ));
        }
        if let Some(dt) = self.meta.timestep_s {
            if !(dt > 0.0) {
                problems.push(format!("meta.timestep_s must be positive, got {dt}"));
            }
        }
        if !self.trace.is_file() {
            problems.push(format!("trace file {} not found", self.trace.display()));
        }
        if let Some(p) = &self.pads {
            if !p.is_file() {
                problems.push(format!("pad file {} not found", p.display()));
            }
        }
        if !self.floorplan.is_file() {
            problems.push(format!(
                "floorplan file {} not found",
                self.floorplan.display()
            ));
        } else {
            match Floorplan::load(&self.floorplan) {
                Ok(fp) if self.tiling.nx > 0 && self.tiling.ny > 0 && self.pitch_um > 0.0 => {
                    let tw = fp.die.w_um / self.tiling.nx as f64;
                    let th = fp.die.h_um / self.tiling.ny as f64;
                    if self.pitch_um > tw.min(th) * (1.0 + 1e-12) {
                        problems.push(format!(
                            "pitch_um {} exceeds the tile size {} µm",
                            self.pitch_um,
                            tw.min(th)
                        ));
                    }
                }
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn pad_spec(&self) -> Result<PadSpec> {
        match &self.pads {
            None => Ok(PadSpec::Corners),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let points: Vec<[f64; 2]> =
                    serde_json::from_str(&text).map_err(|e| Error::json(p, e))?;
                if points.is_empty() {
                    return Err(Error::Config(vec![format!(
                        "pad file {} is empty",
                        p.display()
                    )]));
                }
                Ok(PadSpec::Points(points))
            }
        }
    }
}
