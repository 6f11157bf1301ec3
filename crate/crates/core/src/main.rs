use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pdnplan::electrical::write_spice;
use pdnplan::gridgen::PdnLayout;
use pdnplan::report::{
    self, compare, read_json, run, run_classify, solve_layout, tiles_for_layout, to_json,
    write_files, write_outputs, AnalysisReport, PowerMode, RunConfig, Tiling,
};

#[derive(Parser)]
#[command(
    name = "pdnplan",
    version,
    about = "Workload-aware power grid planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Power that drives the adaptive grid: average or peak.
    #[arg(long)]
    mode: Option<PowerMode>,
    #[arg(long)]
    k: Option<usize>,
    /// Tile grid as NXxNY.
    #[arg(long)]
    tiles: Option<Tiling>,
    #[arg(long)]
    pitch: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)
            .with_context(|| format!("loading config {}", self.config.display()))?;
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.tiles {
            cfg.tiling = t;
        }
        if let Some(p) = self.pitch {
            cfg.pitch_um = p;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and check the adaptive grid and the uniform baseline.
    Analyze(Overrides),
    /// Map power to tiles and write the class map only.
    Classify(Overrides),
    /// Solve a stored layout under the configured workload.
    Solve {
        #[command(flatten)]
        run: Overrides,
        #[arg(long)]
        layout: PathBuf,
        /// Also write a SPICE netlist of the extracted network.
        #[arg(long)]
        netlist: Option<PathBuf>,
    },
    /// Regenerate the SVG renderings of a finished run.
    Render {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Tabulate differences between two reports.
    Compare { a: PathBuf, b: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether the checked grid is compliant.
fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Analyze(o) => {
            let cfg = o.load()?;
            let art = run(&cfg)?;
            write_outputs(&art, &cfg.out)?;
            let r = &art.report;
            println!(
                "{}: {} tiles, H/M/L/I = {}/{}/{}/{}",
                r.scenario.workload,
                r.geometry.len(),
                r.classes.high,
                r.classes.medium,
                r.classes.low,
                r.classes.idle
            );
            println!(
                "metal area: adaptive {:.1} um2, uniform {:.1} um2, reduction {:.2}%",
                r.adaptive.metal_area_um2, r.uniform.metal_area_um2, r.reduction_pct
            );
            for (name, g) in [("adaptive", &r.adaptive), ("uniform", &r.uniform)] {
                println!(
                    "{name}: worst drop {:.4} V, {} IR and {} EM violations",
                    g.worst_ir_drop_v, g.ir_violations, g.em_violations
                );
            }
            println!("wrote {}", cfg.out.display());
            Ok(r.adaptive.compliant())
        }
        Command::Classify(o) => {
            let cfg = o.load()?;
            let (_, cm) = run_classify(&cfg)?;
            write_files(&cfg.out, &[("classmap.json", to_json(&cm))])?;
            let h = cm.histogram();
            println!("H/M/L/I = {}/{}/{}/{}", h.high, h.medium, h.low, h.idle);
            Ok(true)
        }
        Command::Solve {
            run,
            layout,
            netlist,
        } => {
            let cfg = run.load()?;
            let layout: PdnLayout = read_json(&layout)?;
            let inputs = report::load_inputs(&cfg)?;
            let tiles = tiles_for_layout(&inputs, &layout, cfg.mode);
            let grid = solve_layout(&layout, tiles, &cfg.tech, &cfg.pad_spec()?, &cfg.solver)?;
            if let Some(path) = netlist {
                std::fs::write(&path, write_spice(&grid.graph))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let g = report::grid_report(&grid, &cfg.tech);
            println!("{}", to_json(&g).trim_end());
            Ok(g.compliant())
        }
        Command::Render { dir } => {
            report::render_dir(&dir)?;
            println!("rendered {}", dir.display());
            Ok(true)
        }
        Command::Compare { a, b } => {
            let ra: AnalysisReport = read_json(&a)?;
            let rb: AnalysisReport = read_json(&b)?;
            print!("{}", compare(&ra, &rb)?);
            Ok(true)
        }
    }
}
