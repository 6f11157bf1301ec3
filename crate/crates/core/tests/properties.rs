mod common;

use approx::assert_relative_eq;
use pdnplan::classify::{classify, Thresholds, TileClass};
use pdnplan::electrical::{
    build_graph, pad_currents, solve, PadSpec, SolveOptions, SolverMethod, TechParams,
};
use pdnplan::floorplan::{map_power, partition, tile_peak_power, Die, Floorplan, Placement, Rect};
use pdnplan::gridgen::{build_skeleton, instantiate_adaptive, instantiate_uniform, WireWidths};
use pdnplan::trace_io::{average_power, parse_trace, per_step_power, PowerTrace, TraceMeta};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn samples(comps: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..10.0f64, comps), 1..30)
}

fn trace_of(rows: Vec<Vec<f64>>) -> PowerTrace {
    let names = (0..rows[0].len()).map(|i| format!("u{i}")).collect();
    PowerTrace::new(names, 1.0, rows, TraceMeta::default()).unwrap()
}

fn floorplan(rects: &[(f64, f64, f64, f64)]) -> Floorplan {
    let placements = rects
        .iter()
        .enumerate()
        .map(|(i, &(x, y, w, h))| Placement {
            component: format!("u{i}"),
            rect: Rect::new(
                x * 1000.0,
                y * 1000.0,
                (x + w * (1.0 - x)) * 1000.0,
                (y + h * (1.0 - y)) * 1000.0,
            ),
        })
        .collect();
    Floorplan::new(Die::new(1000.0, 1000.0), placements).unwrap()
}

fn rects(n: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.0..0.9f64, 0.0..0.9f64, 0.05..1.0f64, 0.05..1.0f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(rows in samples(3)) {
        let mut text = String::from("t,a,b,c\n");
        for (t, r) in rows.iter().enumerate() {
            text.push_str(&format!("{t},{},{},{}\n", r[0], r[1], r[2]));
        }
        let trace = parse_trace(&text, "mem").unwrap();
        prop_assert_eq!(trace.samples(), &rows[..]);
    }

    #[test]
    fn average_lies_between_extremes(rows in samples(4)) {
        let trace = trace_of(rows.clone());
        let avg = average_power(&trace).unwrap();
        for (k, p) in avg.iter().enumerate() {
            let lo = rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|r| r[k]).fold(0.0, f64::max);
            prop_assert!(p.power_w >= lo * (1.0 - 1e-12) && p.power_w <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mapping_conserves_power(r in rects(5), n in 1usize..12, m in 1usize..12, p in prop::collection::vec(0.0..4.0f64, 5)) {
        let fp = floorplan(&r);
        let grid = partition(&fp, n, m).unwrap();
        let trace = trace_of(vec![p.clone()]);
        let mapped = map_power(&grid, &fp, &average_power(&trace).unwrap(), 1.0).unwrap();
        let want: f64 = p.iter().sum();
        prop_assert!((mapped.total_power_w() - want).abs() <= 1e-9 * want.max(1e-300));
        prop_assert!(mapped.tiles.iter().all(|t| t.power_w >= 0.0));
    }

    #[test]
    fn peak_equals_max_of_per_step_maps(r in rects(3), rows in samples(3), n in 1usize..8) {
        let fp = floorplan(&r);
        let grid = partition(&fp, n, n).unwrap();
        let trace = trace_of(rows);
        let peak = tile_peak_power(&trace, &fp, &grid, 1.0).unwrap();
        let mut want = vec![0.0f64; grid.geometry.len()];
        for t in 0..trace.num_steps() {
            let step = map_power(&grid, &fp, &per_step_power(&trace, t).unwrap(), 1.0).unwrap();
            for (w, s) in want.iter_mut().zip(&step.tiles) {
                *w = w.max(s.power_w);
            }
        }
        prop_assert_eq!(peak.powers(), want);
    }

    #[test]
    fn classes_are_monotone_in_power(p in prop::collection::vec(0.0..1.0f64, 16)) {
        let fp = Floorplan::new(Die::new(40.0, 40.0), vec![]).unwrap();
        let tiles = partition(&fp, 4, 4).unwrap().with_powers(&p, 1.0).unwrap();
        let cm = classify(&tiles, &Thresholds::default()).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if p[i] <= p[j] {
                    prop_assert!(cm.classes[i] <= cm.classes[j]);
                }
            }
        }
        if p.iter().any(|&v| v > 0.0) {
            prop_assert!(cm.classes.contains(&TileClass::High));
        }
    }

    #[test]
    fn adaptive_never_exceeds_uniform(classes in prop::collection::vec(0usize..4, 9), k in 1usize..3) {
        let fp = Floorplan::new(Die::new(240.0, 240.0), vec![]).unwrap();
        let geom = partition(&fp, 3, 3).unwrap().geometry;
        let sk = build_skeleton(&geom, 10.0).unwrap();
        let p: Vec<f64> = classes.iter().map(|&c| [0.0, 0.1, 0.3, 1.0][c]).collect();
        let tiles = partition(&fp, 3, 3).unwrap().with_powers(&p, 1.0).unwrap();
        let w = WireWidths::default();
        let uniform = instantiate_uniform(&sk, &geom, &w).unwrap();
        if let Ok(cm) = classify(&tiles, &Thresholds::default()) {
            let adaptive = instantiate_adaptive(&sk, &cm, &geom, k, &w).unwrap();
            prop_assert!(adaptive.metal_area_um2 <= uniform.metal_area_um2);
            prop_assert!(adaptive.metal_area_um2 > 0.0);
        }
    }

    #[test]
    fn grid_solution_conserves_current(p in prop::collection::vec(0.0..0.5f64, 4), seed in any::<u64>()) {
        let fp = Floorplan::new(Die::new(200.0, 200.0), vec![]).unwrap();
        let tiles = partition(&fp, 2, 2).unwrap().with_powers(&p, 1.0).unwrap();
        let sk = build_skeleton(&tiles.geometry, 20.0).unwrap();
        let layout = instantiate_uniform(&sk, &tiles.geometry, &WireWidths::default()).unwrap();
        let g = build_graph(&layout, &tiles, &TechParams::default(), &PadSpec::Corners).unwrap();
        let method = if seed % 2 == 0 { SolverMethod::Cg } else { SolverMethod::Dense };
        let r = solve(&g, &SolveOptions { method, ..SolveOptions::default() }).unwrap();
        let supplied: f64 = pad_currents(&g, &r).iter().sum();
        prop_assert!((supplied - tiles.total_current_a()).abs() <= 1e-8 * tiles.total_current_a().max(1e-12));
        prop_assert!(r.node_voltages.iter().all(|&v| v <= 1.0 + 1e-12));
    }
}

#[test]
fn random_meshes_agree_between_solvers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let g = common::random_mesh(&mut rng, 4..=60);
        let dense = solve(
            &g,
            &SolveOptions {
                method: SolverMethod::Dense,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let cg = solve(
            &g,
            &SolveOptions {
                method: SolverMethod::Cg,
                tol: 1e-12,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let oracle = common::mna_voltages(&g);
        for ((d, c), o) in dense
            .node_voltages
            .iter()
            .zip(&cg.node_voltages)
            .zip(&oracle)
        {
            assert!(common::rel_err(*d, *o, 1.0) < 1e-10);
            assert_relative_eq!(*c, *d, epsilon = 1e-8, max_relative = 1e-9);
        }
    }
}

#[test]
fn three_by_three_centre_sink_matches_nodal_oracle() {
    let fp = Floorplan::new(Die::new(30.0, 30.0), vec![]).unwrap();
    let tiles = partition(&fp, 1, 1).unwrap().with_powers(&[0.0], 1.0).unwrap();
    let sk = build_skeleton(&tiles.geometry, 10.0).unwrap();
    let layout = instantiate_uniform(&sk, &tiles.geometry, &WireWidths::default()).unwrap();
    let g = build_graph(&layout, &tiles, &TechParams::default(), &PadSpec::Corners).unwrap();
    assert_eq!((g.nodes.len(), g.pads.len()), (9, 4));
    let centre = g.nodes.iter().position(|n| n.name == "n1_1").unwrap();
    let mut inj = vec![0.0; 9];
    inj[centre] = 0.3;
    let g = common::with_injections(&g, inj);
    let oracle = common::mna_voltages(&g);
    for method in [SolverMethod::Dense, SolverMethod::Cg] {
        let r = solve(&g, &SolveOptions { method, tol: 1e-12, ..SolveOptions::default() }).unwrap();
        assert!(common::rel_err(r.node_voltages[centre], oracle[centre], 1.0) <= 1e-9);
    }
    // Four identical two-branch paths from the centre to the corners.
    let r_path = 2.0 * 0.04 * 10.0;
    let edge = oracle[g.nodes.iter().position(|n| n.name == "n1_0").unwrap()];
    assert!(oracle[centre] < edge && edge < 1.0);
    assert!(1.0 - oracle[centre] < 0.3 * r_path / 4.0 + 1e-12);
}
