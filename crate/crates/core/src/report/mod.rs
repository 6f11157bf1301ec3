//! End-to-end orchestration, reports and renderings.
//!
//! A run maps the trace onto tiles, classifies them, builds the adaptive grid
//! and the uniform baseline, then solves and checks both. The baseline is
//! always loaded with per-tile peak power, whatever mode drives the adaptive
//! grid.

mod compare;
mod config;
mod render;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassHistogram, ClassMap, Thresholds};
use crate::electrical::{
    build_graph, solve, verify, PadSpec, PdnGraph, SolveOptions, SolveResult, SolverMethod,
    TechParams,
};
use crate::error::{Error, Result, StageExt};
use crate::floorplan::{map_power, partition, tile_peak_power, Floorplan, TileGeometry, TileGrid};
use crate::gridgen::{
    build_skeleton, instantiate_adaptive, instantiate_uniform, LayoutMode, PdnLayout, WireWidths,
};
use crate::trace_io::{average_power, load_trace, PowerTrace, TraceMeta};

pub use compare::{compare, Comparison, DeltaRow};
pub use config::{MetaConfig, PowerMode, RunConfig, Tiling};
pub use render::render_svg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub workload: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cores: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<f64>,
    pub mode: PowerMode,
    pub components: usize,
    pub time_steps: usize,
    pub timestep_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub k: usize,
    pub pitch_um: f64,
    pub thresholds: Thresholds,
    pub tech: TechParams,
    pub widths: WireWidths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileStats {
    /// Power of the tile map driving the adaptive grid.
    pub total_power_w: f64,
    pub max_tile_power_w: f64,
    pub mean_tile_power_w: f64,
    /// Sum of per-tile peaks, the load on the baseline grid.
    pub peak_total_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub metal_area_um2: f64,
    pub segments: usize,
    pub nodes: usize,
    pub branches: usize,
    pub pads: Vec<[f64; 2]>,
    pub load_current_a: f64,
    pub worst_ir_drop_v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_node: Option<String>,
    pub max_current_density_a_per_um2: f64,
    pub ir_violations: usize,
    pub em_violations: usize,
    pub solver: SolverDiagnostics,
}

impl GridReport {
    pub fn compliant(&self) -> bool {
        self.ir_violations == 0 && self.em_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scenario: Scenario,
    pub geometry: TileGeometry,
    pub parameters: Parameters,
    pub tiles: TileStats,
    pub classes: ClassHistogram,
    pub adaptive: GridReport,
    pub uniform: GridReport,
    /// `100 · (A_uniform − A_adaptive) / A_uniform`.
    pub reduction_pct: f64,
}

pub fn reduction_pct(uniform_area: f64, adaptive_area: f64) -> f64 {
    100.0 * (uniform_area - adaptive_area) / uniform_area
}

/// A grid together with its network and solution.
#[derive(Debug, Clone)]
pub struct SolvedGrid {
    pub layout: PdnLayout,
    pub graph: PdnGraph,
    pub solution: SolveResult,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: AnalysisReport,
    pub classmap: ClassMap,
    pub tiles: TileGrid,
    pub adaptive: SolvedGrid,
    pub uniform: SolvedGrid,
}

/// Inputs shared by every pipeline entry point.
pub struct Inputs {
    pub trace: PowerTrace,
    pub floorplan: Floorplan,
    pub average_tiles: TileGrid,
    pub peak_tiles: TileGrid,
}

impl Inputs {
    pub fn tiles_for(&self, mode: PowerMode) -> &TileGrid {
        match mode {
            PowerMode::Average => &self.average_tiles,
            PowerMode::Peak => &self.peak_tiles,
        }
    }
}

/// Loads trace and floorplan and maps both average and peak power to tiles.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let trace = load_trace(&cfg.trace).stage("trace")?;
    let workload = cfg
        .meta
        .workload
        .clone()
        .unwrap_or_else(|| trace.meta().workload.clone());
    let trace = trace.with_meta(TraceMeta {
        workload,
        cores: cfg.meta.cores,
        temperature_c: cfg.meta.temperature_c,
    });
    let trace = match cfg.meta.timestep_s {
        Some(dt) => trace.with_timestep(dt).stage("trace")?,
        None => trace,
    };
    let floorplan = Floorplan::load(&cfg.floorplan).stage("floorplan")?;
    let grid = partition(&floorplan, cfg.tiling.nx, cfg.tiling.ny).stage("partition")?;
    let avg = average_power(&trace).stage("average power")?;
    let v_dd = cfg.tech.v_dd;
    let average_tiles = map_power(&grid, &floorplan, &avg, v_dd).stage("power mapping")?;
    let peak_tiles = tile_peak_power(&trace, &floorplan, &grid, v_dd).stage("peak mapping")?;
    Ok(Inputs {
        trace,
        floorplan,
        average_tiles,
        peak_tiles,
    })
}

/// Classifies the tiles that drive the adaptive grid.
pub fn run_classify(cfg: &RunConfig) -> Result<(Inputs, ClassMap)> {
    let inputs = load_inputs(cfg)?;
    let cm = classify(inputs.tiles_for(cfg.mode), &cfg.thresholds).stage("classification")?;
    Ok((inputs, cm))
}

/// Builds, solves and checks the network of a layout under the given tiles.
pub fn solve_layout(
    layout: &PdnLayout,
    tiles: &TileGrid,
    tech: &TechParams,
    pads: &PadSpec,
    opts: &SolveOptions,
) -> Result<SolvedGrid> {
    let graph = build_graph(layout, tiles, tech, pads).stage("network extraction")?;
    let mut solution = solve(&graph, opts).stage("solve")?;
    verify(&mut solution, &graph, tech);
    Ok(SolvedGrid {
        layout: layout.clone(),
        graph,
        solution,
    })
}

pub fn grid_report(grid: &SolvedGrid, tech: &TechParams) -> GridReport {
    let g = &grid.graph;
    let r = &grid.solution;
    let max_j = g
        .branches
        .iter()
        .zip(&r.branch_currents)
        .map(|(b, i)| i.abs() / (b.width_um * tech.wire_thickness_um))
        .fold(0.0, f64::max);
    GridReport {
        metal_area_um2: grid.layout.metal_area_um2,
        segments: grid.layout.segments.len(),
        nodes: g.nodes.len(),
        branches: g.branches.len(),
        pads: g
            .pads
            .iter()
            .map(|&p| [g.nodes[p].x_um, g.nodes[p].y_um])
            .collect(),
        load_current_a: g.total_injection_a(),
        worst_ir_drop_v: r.worst_ir_drop,
        worst_node: r.worst_node.map(|n| g.nodes[n].name.clone()),
        max_current_density_a_per_um2: max_j,
        ir_violations: r.ir_violations.len(),
        em_violations: r.em_violations.len(),
        solver: SolverDiagnostics {
            method: r.method,
            iterations: r.solver_iters,
            residual: r.residual,
        },
    }
}

/// Runs the full pipeline without touching the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let (inputs, cm) = run_classify(cfg)?;
    let tiles = inputs.tiles_for(cfg.mode).clone();
    let geom = tiles.geometry;

    let sk = build_skeleton(&geom, cfg.pitch_um).stage("skeleton")?;
    let adaptive =
        instantiate_adaptive(&sk, &cm, &geom, cfg.k, &cfg.widths).stage("adaptive grid")?;
    let uniform = instantiate_uniform(&sk, &geom, &cfg.widths).stage("uniform grid")?;
    let pads = cfg.pad_spec().stage("pads")?;

    let (a, u) = std::thread::scope(|s| {
        let a = s.spawn(|| solve_layout(&adaptive, &tiles, &cfg.tech, &pads, &cfg.solver));
        let u = solve_layout(&uniform, &inputs.peak_tiles, &cfg.tech, &pads, &cfg.solver);
        (a.join().expect("adaptive solve thread panicked"), u)
    });
    let adaptive = a.stage("adaptive analysis")?;
    let uniform = u.stage("baseline analysis")?;

    let powers = tiles.powers();
    let meta = inputs.trace.meta();
    let report = AnalysisReport {
        scenario: Scenario {
            workload: meta.workload.clone(),
            cores: meta.cores,
            temperature_c: meta.temperature_c,
            mode: cfg.mode,
            components: inputs.trace.num_components(),
            time_steps: inputs.trace.num_steps(),
            timestep_s: inputs.trace.timestep_s(),
        },
        geometry: geom,
        parameters: Parameters {
            k: cfg.k,
            pitch_um: cfg.pitch_um,
            thresholds: cfg.thresholds,
            tech: cfg.tech,
            widths: cfg.widths,
        },
        tiles: TileStats {
            total_power_w: tiles.total_power_w(),
            max_tile_power_w: cm.p_max_w,
            mean_tile_power_w: tiles.total_power_w() / powers.len() as f64,
            peak_total_power_w: inputs.peak_tiles.total_power_w(),
        },
        classes: cm.histogram(),
        adaptive: grid_report(&adaptive, &cfg.tech),
        uniform: grid_report(&uniform, &cfg.tech),
        reduction_pct: reduction_pct(
            uniform.layout.metal_area_um2,
            adaptive.layout.metal_area_um2,
        ),
    };
    Ok(RunArtifacts {
        report,
        classmap: cm,
        tiles,
        adaptive,
        uniform,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes the report, layouts, class map and renderings. All files are
/// rendered in memory first so a failure leaves no partial report.
pub fn write_outputs(artifacts: &RunArtifacts, out: &Path) -> Result<()> {
    let files = [
        ("report.json", to_json(&artifacts.report)),
        ("classmap.json", to_json(&artifacts.classmap)),
        ("layout_adaptive.json", to_json(&artifacts.adaptive.layout)),
        ("layout_uniform.json", to_json(&artifacts.uniform.layout)),
        (
            "layout_adaptive.svg",
            render_svg(
                &artifacts.adaptive.layout,
                &artifacts.classmap,
                &artifacts.report.adaptive.pads,
            ),
        ),
        (
            "layout_uniform.svg",
            render_svg(
                &artifacts.uniform.layout,
                &artifacts.classmap,
                &artifacts.report.uniform.pads,
            ),
        ),
    ];
    write_files(out, &files)
}

pub fn write_files(out: &Path, files: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (name, body) in files {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Rendering inputs recovered from a finished run directory.
pub fn render_dir(dir: &Path) -> Result<()> {
    let report: AnalysisReport = read_json(&dir.join("report.json"))?;
    let cm: ClassMap = read_json(&dir.join("classmap.json"))?;
    let adaptive: PdnLayout = read_json(&dir.join("layout_adaptive.json"))?;
    let uniform: PdnLayout = read_json(&dir.join("layout_uniform.json"))?;
    if !cm.matches(&adaptive.geometry) || uniform.geometry != adaptive.geometry {
        return Err(Error::Geometry(format!(
            "artifacts in {} do not share one tile grid",
            dir.display()
        )));
    }
    let files = [
        (
            "layout_adaptive.svg",
            render_svg(&adaptive, &cm, &report.adaptive.pads),
        ),
        (
            "layout_uniform.svg",
            render_svg(&uniform, &cm, &report.uniform.pads),
        ),
    ];
    write_files(dir, &files)
}

/// Tiles that load a stand-alone layout: the baseline always sees peaks.
pub fn tiles_for_layout<'a>(
    inputs: &'a Inputs,
    layout: &PdnLayout,
    mode: PowerMode,
) -> &'a TileGrid {
    match layout.mode {
        LayoutMode::Uniform => &inputs.peak_tiles,
        LayoutMode::Adaptive { .. } => inputs.tiles_for(mode),
    }
}
