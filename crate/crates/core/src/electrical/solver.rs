//! Nodal analysis of the pad-grounded conductance system.
//!
//! Unknowns are the voltage drops `d = V_dd - v` at non-pad nodes; pads have
//! `d = 0` and drop out of the system. The remaining matrix is the grid
//! Laplacian restricted to non-pad nodes, which is symmetric positive
//! definite whenever every node reaches a pad. Small systems are factored
//! densely (Cholesky); larger ones use Jacobi-preconditioned conjugate
//! gradients. All reductions run in a fixed sequential order.

use serde::{Deserialize, Serialize};

use super::{EmViolation, IrViolation, PdnGraph};
use crate::error::{Error, Result};

/// Systems with at most this many unknowns are factored densely under
/// [`SolverMethod::Auto`].
pub const DENSE_LIMIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    Auto,
    Dense,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Relative residual `‖G·d − i‖ / ‖i‖` to reach.
    pub tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub max_iters: Option<usize>,
    pub method: SolverMethod,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iters: None,
            method: SolverMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub v_dd: f64,
    pub node_voltages: Vec<f64>,
    /// Signed current from `branch.a` to `branch.b`.
    pub branch_currents: Vec<f64>,
    pub worst_ir_drop: f64,
    pub worst_node: Option<usize>,
    pub ir_violations: Vec<IrViolation>,
    pub em_violations: Vec<EmViolation>,
    pub method: SolverMethod,
    pub solver_iters: usize,
    pub residual: f64,
}

impl SolveResult {
    pub fn drop_at(&self, node: usize) -> f64 {
        self.v_dd - self.node_voltages[node]
    }
}

/// Compressed sparse rows.
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            row_ptr,
            cols,
            vals,
        }
    }

    fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &Csr, x: &[f64], b: &[f64], r: &mut [f64]) -> f64 {
    a.mul(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Solves the network for node voltages and branch currents. Violation lists
/// are left empty; see [`super::verify`].
pub fn solve(g: &PdnGraph, opts: &SolveOptions) -> Result<SolveResult> {
    if g.pads.is_empty() {
        return Err(Error::NoPads);
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!(
            "solver tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n_nodes = g.nodes.len();
    let is_pad = g.pad_mask();
    let mut unknown = vec![usize::MAX; n_nodes];
    let mut count = 0;
    for i in 0..n_nodes {
        if !is_pad[i] {
            unknown[i] = count;
            count += 1;
        }
    }

    let mut trip = Vec::with_capacity(4 * g.branches.len());
    for br in &g.branches {
        let c = 1.0 / br.resistance_ohm;
        let (ua, ub) = (unknown[br.a], unknown[br.b]);
        if ua != usize::MAX {
            trip.push((ua, ua, c));
        }
        if ub != usize::MAX {
            trip.push((ub, ub, c));
        }
        if ua != usize::MAX && ub != usize::MAX {
            trip.push((ua, ub, -c));
            trip.push((ub, ua, -c));
        }
    }
    let a = Csr::from_triplets(count, trip);
    let b: Vec<f64> = (0..n_nodes)
        .filter(|&i| !is_pad[i])
        .map(|i| g.injections[i])
        .collect();

    let method = match opts.method {
        SolverMethod::Auto if count <= DENSE_LIMIT => SolverMethod::Dense,
        SolverMethod::Auto => SolverMethod::Cg,
        m => m,
    };
    let b_norm = norm(&b);
    let (d, iters) = if b_norm == 0.0 {
        (vec![0.0; count], 0)
    } else {
        match method {
            SolverMethod::Dense => (cholesky_solve(&a, &b)?, 0),
            _ => {
                let max_iters = opts.max_iters.unwrap_or(10 * count.max(1));
                pcg(&a, &b, opts.tol, max_iters)?
            }
        }
    };
    let mut r = vec![0.0; count];
    let res = if b_norm == 0.0 {
        0.0
    } else {
        residual(&a, &d, &b, &mut r) / b_norm
    };

    let drop_of = |i: usize| if is_pad[i] { 0.0 } else { d[unknown[i]] };
    let node_voltages: Vec<f64> = (0..n_nodes).map(|i| g.v_dd - drop_of(i)).collect();
    let branch_currents = g
        .branches
        .iter()
        .map(|br| (drop_of(br.b) - drop_of(br.a)) / br.resistance_ohm)
        .collect();
    let mut worst = 0.0;
    let mut worst_node = None;
    for (i, &v) in node_voltages.iter().enumerate() {
        let dv = g.v_dd - v;
        if dv > worst {
            worst = dv;
            worst_node = Some(i);
        }
    }
    Ok(SolveResult {
        v_dd: g.v_dd,
        node_voltages,
        branch_currents,
        worst_ir_drop: worst,
        worst_node,
        ir_violations: Vec::new(),
        em_violations: Vec::new(),
        method,
        solver_iters: iters,
        residual: res,
    })
}

fn cholesky_solve(a: &Csr, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[k];
            if j <= i {
                l[i * n + j] = a.vals[k];
            }
        }
    }
    for j in 0..n {
        let mut diag = l[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 0.0) {
            return Err(Error::InvalidNetwork(
                "conductance matrix is not positive definite".into(),
            ));
        }
        let diag = diag.sqrt();
        l[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut s = l[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / diag;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Ok(y)
}

/// Jacobi-preconditioned CG from a zero start. Convergence is confirmed on the
/// true residual; a drifted recurrence restarts from the current iterate.
fn pcg(a: &Csr, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.n();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let b_norm = norm(b);
    let target = tol * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iters = 0;
    let mut true_res = b_norm;

    while iters < max_iters {
        let pass_start = iters;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iters < max_iters {
            a.mul(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iters += 1;
            if norm(&r) <= target {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        true_res = residual(a, &x, b, &mut r);
        if true_res <= target {
            return Ok((x, iters));
        }
        if iters == pass_start {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: iters,
        residual: true_res / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrical::{Branch, Node};

    fn node(i: usize) -> Node {
        Node {
            x_um: i as f64,
            y_um: 0.0,
            tile: None,
            name: format!("n{i}"),
        }
    }

    fn branch(a: usize, b: usize, r: f64) -> Branch {
        Branch {
            a,
            b,
            resistance_ohm: r,
            width_um: 1.0,
            length_um: 1.0,
        }
    }

    fn single_branch() -> PdnGraph {
        PdnGraph::new(
            vec![node(0), node(1)],
            vec![branch(0, 1, 1.0)],
            vec![0],
            vec![0.0, 0.1],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn ohms_law() {
        for method in [SolverMethod::Dense, SolverMethod::Cg, SolverMethod::Auto] {
            let opts = SolveOptions {
                method,
                ..SolveOptions::default()
            };
            let r = solve(&single_branch(), &opts).unwrap();
            assert!((r.node_voltages[1] - 0.9).abs() <= 1e-12, "{method:?}");
            assert_eq!(r.node_voltages[0], 1.0);
            assert!((r.worst_ir_drop - 0.1).abs() <= 1e-12);
            assert_eq!(r.worst_node, Some(1));
            assert!((r.branch_currents[0] - 0.1).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_injection_is_homogeneous() {
        let g = PdnGraph::new(
            vec![node(0), node(1), node(2)],
            vec![branch(0, 1, 2.0), branch(1, 2, 3.0)],
            vec![0],
            vec![0.0; 3],
            1.2,
        )
        .unwrap();
        let r = solve(&g, &SolveOptions::default()).unwrap();
        assert!(r.node_voltages.iter().all(|&v| v == 1.2));
        assert!(r.branch_currents.iter().all(|&c| c == 0.0));
        assert_eq!(r.worst_ir_drop, 0.0);
        assert_eq!(r.worst_node, None);
    }

    #[test]
    fn pad_with_injection_has_no_drop() {
        let g = PdnGraph::new(
            vec![node(0), node(1)],
            vec![branch(0, 1, 1.0)],
            vec![0],
            vec![0.5, 0.1],
            1.0,
        )
        .unwrap();
        let r = solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(r.node_voltages[0], 1.0);
    }

    #[test]
    fn missing_pads_and_bad_tolerance() {
        let mut g = single_branch();
        g.pads.clear();
        assert!(matches!(
            solve(&g, &SolveOptions::default()),
            Err(Error::NoPads)
        ));
        let opts = SolveOptions {
            tol: 0.0,
            ..SolveOptions::default()
        };
        assert!(solve(&single_branch(), &opts).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        // A chain where CG needs several iterations.
        let n = 30;
        let nodes = (0..n).map(node).collect();
        let branches = (0..n - 1)
            .map(|i| branch(i, i + 1, 1.0 + i as f64))
            .collect();
        let g = PdnGraph::new(nodes, branches, vec![0], vec![0.01; n], 1.0).unwrap();
        let opts = SolveOptions {
            tol: 1e-12,
            max_iters: Some(2),
            method: SolverMethod::Cg,
        };
        match solve(&g, &opts) {
            Err(Error::NoConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn cg_and_cholesky_agree() {
        let n = 40;
        let nodes = (0..n).map(node).collect();
        let mut branches: Vec<Branch> = (0..n - 1)
            .map(|i| branch(i, i + 1, 0.5 + (i % 7) as f64))
            .collect();
        for i in (0..n - 5).step_by(3) {
            branches.push(branch(i, i + 5, 2.0 + (i % 3) as f64));
        }
        let inj: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 * 0.01).collect();
        let g = PdnGraph::new(nodes, branches, vec![0, n - 1], inj, 1.0).unwrap();
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
                tol: 1e-13,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert!(cg.solver_iters > 0);
        assert!(cg.residual <= 1e-13);
        for (a, b) in dense.node_voltages.iter().zip(&cg.node_voltages) {
            assert!((a - b).abs() <= 1e-10, "{a} {b}");
        }
    }
}
