#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use pdnplan::electrical::{Branch, Node, PdnGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

/// A connected random resistive mesh: a random spanning tree plus extra
/// branches, sink currents in `[0, 1]` A and 1 to 4 pads.
pub fn random_mesh<R: Rng>(rng: &mut R, nodes: std::ops::RangeInclusive<usize>) -> PdnGraph {
    let n = rng.gen_range(nodes);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut branches = Vec::new();
    let mut push = |rng: &mut R, a: usize, b: usize| {
        let r: f64 = rng.gen_range(0.01..=10.0);
        branches.push(Branch {
            a,
            b,
            resistance_ohm: r,
            width_um: 1.0,
            length_um: r,
        });
    };
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        push(rng, parent, order[i]);
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            push(rng, a, b);
        }
    }
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            x_um: i as f64,
            y_um: 0.0,
            tile: None,
            name: format!("n{i}"),
        })
        .collect();
    let injections: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let pads = ids[..rng.gen_range(1..=4.min(n))].to_vec();
    PdnGraph::new(nodes, branches, pads, injections, 1.0).expect("random mesh is valid")
}

pub fn with_injections(g: &PdnGraph, injections: Vec<f64>) -> PdnGraph {
    PdnGraph {
        injections,
        ..g.clone()
    }
}

/// Full nodal analysis with every node unknown and pad rows pinned to
/// `V_dd`, solved by dense LU.
pub fn mna_voltages(g: &PdnGraph) -> Vec<f64> {
    let n = g.nodes.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for b in &g.branches {
        let c = 1.0 / b.resistance_ohm;
        a[(b.a, b.a)] += c;
        a[(b.b, b.b)] += c;
        a[(b.a, b.b)] -= c;
        a[(b.b, b.a)] -= c;
    }
    for i in 0..n {
        rhs[i] = -g.injections[i];
    }
    for &p in &g.pads {
        for j in 0..n {
            a[(p, j)] = 0.0;
        }
        a[(p, p)] = 1.0;
        rhs[p] = g.v_dd;
    }
    let v = a.lu().solve(&rhs).expect("nodal matrix is nonsingular");
    v.iter().copied().collect()
}

/// Error relative to the reference voltage, floored at `V_dd` so nodes near
/// 0 V are not judged on noise.
pub fn rel_err(v: f64, reference: f64, v_dd: f64) -> f64 {
    (v - reference).abs() / reference.abs().max(v_dd)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
