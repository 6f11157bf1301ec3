//! Resistive model of the power grid and its IR-drop and electromigration
//! checks.
//!
//! Every crossing of an instantiated horizontal and vertical wire becomes a
//! node; wires are cut into branches at their nodes. Pads are nodes held at
//! `V_dd`. A tile's current demand is drawn equally from the nodes inside the
//! tile. The nodal system is solved for voltage drops with pads eliminated as
//! fixed boundary values.

mod checks;
mod graph;
mod netlist;
mod solver;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{check_em, check_ir, pad_currents, verify, EmViolation, IrViolation};
pub use graph::{build_graph, PadSpec};
pub use netlist::write_spice;
pub use solver::{solve, SolveOptions, SolveResult, SolverMethod, DENSE_LIMIT};

/// Technology numbers for the resistance and reliability models.
///
/// The defaults are placeholders for experimentation, not characterized
/// values of any process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TechParams {
    pub v_dd: f64,
    pub sheet_res_ohm_sq: f64,
    pub wire_thickness_um: f64,
    /// Current-density limit per µm² of wire cross-section.
    pub j_max_a_per_um2: f64,
    /// Largest allowed drop below `v_dd`.
    pub dv_max: f64,
}

impl Default for TechParams {
    fn default() -> Self {
        TechParams {
            v_dd: 1.0,
            sheet_res_ohm_sq: 0.04,
            wire_thickness_um: 0.5,
            j_max_a_per_um2: 2.0,
            dv_max: 0.05,
        }
    }
}

impl TechParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("v_dd", self.v_dd),
            ("sheet_res_ohm_sq", self.sheet_res_ohm_sq),
            ("wire_thickness_um", self.wire_thickness_um),
            ("j_max_a_per_um2", self.j_max_a_per_um2),
            ("dv_max", self.dv_max),
        ];
        let mut problems: Vec<String> = fields
            .iter()
            .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
            .map(|(n, v)| format!("tech.{n} must be positive, got {v}"))
            .collect();
        if self.dv_max >= self.v_dd {
            problems.push(format!(
                "tech.dv_max ({}) must be below tech.v_dd ({})",
                self.dv_max, self.v_dd
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Resistance of a wire piece by square counting.
    pub fn resistance(&self, length_um: f64, width_um: f64) -> f64 {
        self.sheet_res_ohm_sq * length_um / width_um
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub x_um: f64,
    pub y_um: f64,
    /// Tile the node sits in, when it belongs to a tiled layout.
    pub tile: Option<usize>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    pub resistance_ohm: f64,
    pub width_um: f64,
    pub length_um: f64,
}

/// Resistive network with ideal supply pads and per-node sink currents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdnGraph {
    pub nodes: Vec<Node>,
    pub branches: Vec<Branch>,
    pub pads: Vec<usize>,
    /// Current drawn out of the network at each node, in amperes.
    pub injections: Vec<f64>,
    pub v_dd: f64,
}

impl PdnGraph {
    pub fn new(
        nodes: Vec<Node>,
        branches: Vec<Branch>,
        pads: Vec<usize>,
        injections: Vec<f64>,
        v_dd: f64,
    ) -> Result<Self> {
        let g = PdnGraph {
            nodes,
            branches,
            pads,
            injections,
            v_dd,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if !(self.v_dd > 0.0 && self.v_dd.is_finite()) {
            return Err(Error::InvalidNetwork(format!(
                "v_dd must be positive, got {}",
                self.v_dd
            )));
        }
        if self.injections.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{} injections for {n} nodes",
                self.injections.len()
            )));
        }
        if let Some(i) = self.injections.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork(format!(
                "non-finite injection at node {i}"
            )));
        }
        for (i, b) in self.branches.iter().enumerate() {
            if b.a >= n || b.b >= n || b.a == b.b {
                return Err(Error::InvalidNetwork(format!(
                    "branch {i} has invalid endpoints {} - {}",
                    b.a, b.b
                )));
            }
            if !(b.resistance_ohm > 0.0 && b.resistance_ohm.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "branch {i} resistance must be positive, got {}",
                    b.resistance_ohm
                )));
            }
        }
        if self.pads.is_empty() {
            return Err(Error::NoPads);
        }
        let mut is_pad = vec![false; n];
        for &p in &self.pads {
            if p >= n || is_pad[p] {
                return Err(Error::InvalidNetwork(format!(
                    "invalid or repeated pad node {p}"
                )));
            }
            is_pad[p] = true;
        }

        let mut adj = vec![Vec::new(); n];
        for b in &self.branches {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
        let mut seen = is_pad;
        let mut queue: VecDeque<usize> = self.pads.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let unreached: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
        if let Some(&first) = unreached.first() {
            return Err(Error::Disconnected {
                count: unreached.len(),
                first: self.nodes[first].name.clone(),
            });
        }
        Ok(())
    }

    pub fn pad_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for &p in &self.pads {
            mask[p] = true;
        }
        mask
    }

    pub fn total_injection_a(&self) -> f64 {
        self.injections.iter().sum()
    }

    /// Number of nodes per tile for a grid with `tiles` tiles.
    pub fn nodes_per_tile(&self, tiles: usize) -> Vec<usize> {
        let mut counts = vec![0; tiles];
        for n in &self.nodes {
            if let Some(t) = n.tile {
                counts[t] += 1;
            }
        }
        counts
    }
}
