//! Regenerates the packaged scenarios under `fixtures/`.
//!
//! ```text
//! cargo run -p pdnplan --example gen_fixtures
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn write_trace(path: &Path, names: &[String], rows: &[Vec<f64>]) {
    let mut s = String::from("t");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (t, row) in rows.iter().enumerate() {
        let _ = write!(s, "{t}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    fs::write(path, s).expect("write trace");
}

fn write_json(path: &Path, v: &serde_json::Value) {
    let mut s = serde_json::to_string_pretty(v).expect("serialize");
    s.push('\n');
    fs::write(path, s).expect("write json");
}

/// A square array of supply bumps with `n` columns spanning the die.
fn write_pads(path: &Path, die: f64, n: usize) {
    let step = die / (n - 1) as f64;
    let pads: Vec<[f64; 2]> = (0..n)
        .flat_map(|j| (0..n).map(move |i| [i as f64 * step, j as f64 * step]))
        .collect();
    write_json(path, &json!(pads));
}

fn placement(name: &str, r: [f64; 4]) -> serde_json::Value {
    json!({ "component": name, "rect": r })
}

/// Three blocks whose densities land in High, Medium and Low on a 16x16 grid.
fn hotspot(dir: &Path) {
    // Power of one 125 µm tile in the hot block.
    let tile_w = 0.03;
    let placements = vec![
        placement("hot", [0.0, 0.0, 1000.0, 1000.0]),
        placement("med", [1000.0, 0.0, 2000.0, 1000.0]),
        placement("uncore", [0.0, 1000.0, 2000.0, 2000.0]),
    ];
    write_json(
        &dir.join("floorplan.json"),
        &json!({ "die": { "w_um": 2000.0, "h_um": 2000.0 }, "placements": placements }),
    );
    let names: Vec<String> = ["hot", "med", "uncore"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let scale = [1.0, 0.9, 1.1, 1.0, 0.95, 1.05, 1.0, 0.85];
    let rows: Vec<Vec<f64>> = scale
        .iter()
        .map(|s| {
            vec![
                64.0 * tile_w * s,
                64.0 * 0.4 * tile_w * s,
                128.0 * 0.1 * tile_w * s,
            ]
        })
        .collect();
    write_trace(&dir.join("trace.csv"), &names, &rows);
    write_pads(&dir.join("pads.json"), 2000.0, 9);
    write_json(
        &dir.join("run.json"),
        &json!({
            "trace": "trace.csv",
            "floorplan": "floorplan.json",
            "pads": "pads.json",
            "tiling": { "nx": 16, "ny": 16 },
            "k": 2,
            "pitch_um": 31.25,
            "mode": "average",
            "tech": TECH.clone(),
            "widths": { "horizontal_um": 1.0, "vertical_um": 1.0 },
            "meta": { "workload": "hotspot", "cores": 1, "temperature_c": 60.0 },
            "out": "out"
        }),
    );
}

/// A steady block sets the maximum; a second block is idle except for short
/// bursts at the same density, so peaks promote it from Low to High.
fn bursty(dir: &Path) {
    let tile_w = 0.05;
    let placements = vec![
        placement("steady", [0.0, 0.0, 500.0, 500.0]),
        placement("burst", [500.0, 0.0, 1000.0, 500.0]),
        placement("uncore", [0.0, 500.0, 1000.0, 1000.0]),
    ];
    write_json(
        &dir.join("floorplan.json"),
        &json!({ "die": { "w_um": 1000.0, "h_um": 1000.0 }, "placements": placements }),
    );
    let names: Vec<String> = ["steady", "burst", "uncore"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|t| {
            let burst = if t == 6 || t == 14 {
                16.0 * tile_w
            } else {
                0.0
            };
            vec![16.0 * tile_w, burst, 32.0 * 0.1 * tile_w]
        })
        .collect();
    write_trace(&dir.join("trace.csv"), &names, &rows);
    write_pads(&dir.join("pads.json"), 1000.0, 5);
    for mode in ["average", "peak"] {
        write_json(
            &dir.join(format!("run_{mode}.json")),
            &json!({
                "trace": "trace.csv",
                "floorplan": "floorplan.json",
                "pads": "pads.json",
                "tiling": { "nx": 8, "ny": 8 },
                "k": 2,
                "pitch_um": 15.625,
                "mode": mode,
                "tech": TECH.clone(),
                "meta": { "workload": "bursty" },
                "out": format!("out_{mode}")
            }),
        );
    }
}

const UNITS: [(&str, [f64; 4], f64); 7] = [
    ("ialu", [0.0, 0.0, 300.0, 300.0], 0.030),
    ("fpu", [300.0, 0.0, 700.0, 300.0], 0.040),
    ("lsu", [700.0, 0.0, 1000.0, 300.0], 0.020),
    ("rob", [0.0, 300.0, 500.0, 600.0], 0.025),
    ("bp", [500.0, 300.0, 1000.0, 600.0], 0.010),
    ("ic", [0.0, 600.0, 500.0, 1000.0], 0.015),
    ("dc", [500.0, 600.0, 1000.0, 1000.0], 0.020),
];

/// Four cores with seven units each and phase-varying activity.
fn quad_core(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let origins = [(0.0, 0.0), (1000.0, 0.0), (0.0, 1000.0), (1000.0, 1000.0)];
    let mut names = Vec::new();
    let mut placements = Vec::new();
    let mut nominal = Vec::new();
    for (c, (ox, oy)) in origins.iter().enumerate() {
        for (unit, r, p) in UNITS {
            let name = format!("core{c}.{unit}");
            placements.push(placement(
                &name,
                [r[0] + ox, r[1] + oy, r[2] + ox, r[3] + oy],
            ));
            names.push(name);
            nominal.push(p);
        }
    }
    write_json(
        &dir.join("floorplan.json"),
        &json!({ "die": { "w_um": 2000.0, "h_um": 2000.0 }, "placements": placements }),
    );
    // Each core runs a different duty cycle; each unit jitters around it.
    let activity = [1.0, 0.7, 0.45, 0.2];
    let mut rows = Vec::new();
    for t in 0..200 {
        let phase = if (t / 25) % 2 == 0 { 1.0 } else { 0.6 };
        let row: Vec<f64> = nominal
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let a = activity[i / UNITS.len()] * phase;
                let jitter: f64 = rng.gen_range(0.8..1.2);
                let v = 5.0 * p * a * jitter;
                (v * 1e6).round() / 1e6
            })
            .collect();
        rows.push(row);
    }
    write_trace(&dir.join("trace.csv"), &names, &rows);
    write_pads(&dir.join("pads.json"), 2000.0, 9);
    for mode in ["average", "peak"] {
        write_json(
            &dir.join(format!("run_{mode}.json")),
            &json!({
                "trace": "trace.csv",
                "floorplan": "floorplan.json",
                "pads": "pads.json",
                "tiling": { "nx": 16, "ny": 16 },
                "k": 2,
                "pitch_um": 31.25,
                "mode": mode,
                "tech": TECH.clone(),
                "meta": { "workload": "quad_core", "cores": 4, "temperature_c": 70.0, "timestep_s": 1e-3 },
                "out": format!("out_{mode}")
            }),
        );
    }
}

static TECH: std::sync::LazyLock<serde_json::Value> = std::sync::LazyLock::new(|| {
    json!({
        "v_dd": 1.0,
        "sheet_res_ohm_sq": 0.02,
        "wire_thickness_um": 0.5,
        "j_max_a_per_um2": 2.0,
        "dv_max": 0.05
    })
});

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, f) in [
        ("hotspot", hotspot as fn(&Path)),
        ("bursty", bursty),
        ("quad_core", quad_core),
    ] {
        let dir = root.join(name);
        fs::create_dir_all(&dir).expect("create fixture dir");
        f(&dir);
        println!("wrote {}", dir.display());
    }
}
