use serde::{Deserialize, Serialize};

use super::{PdnGraph, SolveResult, TechParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrViolation {
    pub node: usize,
    pub drop_v: f64,
    pub limit_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmViolation {
    pub branch: usize,
    pub current_a: f64,
    pub density_a_per_um2: f64,
    pub limit_a_per_um2: f64,
}

/// Nodes whose drop below `V_dd` exceeds `dv_max`. A drop equal to the limit
/// is compliant.
pub fn check_ir(r: &SolveResult, tech: &TechParams) -> Vec<IrViolation> {
    r.node_voltages
        .iter()
        .enumerate()
        .filter_map(|(node, &v)| {
            let drop_v = r.v_dd - v;
            (drop_v > tech.dv_max).then_some(IrViolation {
                node,
                drop_v,
                limit_v: tech.dv_max,
            })
        })
        .collect()
}

/// Branches whose DC current density `|I| / (width · thickness)` exceeds the
/// limit.
pub fn check_em(r: &SolveResult, g: &PdnGraph, tech: &TechParams) -> Vec<EmViolation> {
    g.branches
        .iter()
        .zip(&r.branch_currents)
        .enumerate()
        .filter_map(|(branch, (b, &i))| {
            let density = i.abs() / (b.width_um * tech.wire_thickness_um);
            (density > tech.j_max_a_per_um2).then_some(EmViolation {
                branch,
                current_a: i,
                density_a_per_um2: density,
                limit_a_per_um2: tech.j_max_a_per_um2,
            })
        })
        .collect()
}

/// Fills the violation lists of a solved result.
pub fn verify(r: &mut SolveResult, g: &PdnGraph, tech: &TechParams) {
    r.ir_violations = check_ir(r, tech);
    r.em_violations = check_em(r, g, tech);
}

/// Current delivered by each pad, in `g.pads` order: the current leaving the
/// pad into its branches plus any sink current at the pad itself.
pub fn pad_currents(g: &PdnGraph, r: &SolveResult) -> Vec<f64> {
    let mut out = vec![0.0; g.nodes.len()];
    for (b, &i) in g.branches.iter().zip(&r.branch_currents) {
        out[b.a] += i;
        out[b.b] -= i;
    }
    g.pads.iter().map(|&p| out[p] + g.injections[p]).collect()
}
