use std::fmt::Write;

use super::PdnGraph;

/// Renders the network as a SPICE-style DC netlist. Sinks become current
/// sources to ground and pads become ideal voltage sources.
pub fn write_spice(g: &PdnGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* pdnplan resistive grid");
    let _ = writeln!(
        out,
        "* nodes {} branches {} pads {}",
        g.nodes.len(),
        g.branches.len(),
        g.pads.len()
    );
    for (i, b) in g.branches.iter().enumerate() {
        let _ = writeln!(
            out,
            "R{} {} {} {:e}",
            i + 1,
            g.nodes[b.a].name,
            g.nodes[b.b].name,
            b.resistance_ohm
        );
    }
    let mut n = 0;
    for (node, &i) in g.nodes.iter().zip(&g.injections) {
        if i != 0.0 {
            n += 1;
            let _ = writeln!(out, "I{n} {} 0 {i:e}", node.name);
        }
    }
    for (i, &p) in g.pads.iter().enumerate() {
        let _ = writeln!(out, "V{} {} 0 {:e}", i + 1, g.nodes[p].name, g.v_dd);
    }
    out.push_str(".op\n.end\n");
    out
}
