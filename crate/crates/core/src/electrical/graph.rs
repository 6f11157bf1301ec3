use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Branch, Node, PdnGraph, TechParams};
use crate::error::{Error, Result};
use crate::floorplan::TileGrid;
use crate::gridgen::{Orientation, PdnLayout, Wire};

/// Where the supply pads go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PadSpec {
    /// The intersection nearest each die corner.
    #[default]
    Corners,
    /// Each point snaps to its nearest intersection.
    Points(Vec<[f64; 2]>),
}

/// Converts a layout into a resistive network carrying the tiles' current
/// demand.
pub fn build_graph(
    layout: &PdnLayout,
    tiles: &TileGrid,
    tech: &TechParams,
    pads: &PadSpec,
) -> Result<PdnGraph> {
    let geom = &layout.geometry;
    if *geom != tiles.geometry {
        return Err(Error::Geometry(
            "layout and tile grid were built on different partitions".into(),
        ));
    }
    if layout.segments.is_empty() {
        return Err(Error::InvalidNetwork("layout has no wires".into()));
    }
    let sk = &layout.skeleton;
    let eps = 1e-9 * geom.die_w_um().max(geom.die_h_um());

    let mut h_wires: Vec<Vec<Wire>> = vec![Vec::new(); sk.y_lines.len()];
    let mut v_wires: Vec<Vec<Wire>> = vec![Vec::new(); sk.x_lines.len()];
    for w in layout.wires() {
        match w.orientation {
            Orientation::Horizontal => h_wires[w.line].push(w),
            Orientation::Vertical => v_wires[w.line].push(w),
        }
    }
    let covers = |ws: &[Wire], c: f64| ws.iter().any(|w| w.start - eps <= c && c <= w.end + eps);

    let cols: Vec<usize> = sk.x_lines.iter().map(|&x| geom.column_of(x)).collect();
    let rows: Vec<usize> = sk.y_lines.iter().map(|&y| geom.row_of(y)).collect();

    let mut nodes = Vec::new();
    let mut at: HashMap<(usize, usize), usize> = HashMap::new();
    for (l, &y) in sk.y_lines.iter().enumerate() {
        if h_wires[l].is_empty() {
            continue;
        }
        for (j, &x) in sk.x_lines.iter().enumerate() {
            if covers(&h_wires[l], x) && covers(&v_wires[j], y) {
                at.insert((j, l), nodes.len());
                nodes.push(Node {
                    x_um: x,
                    y_um: y,
                    tile: Some(geom.index(cols[j], rows[l])),
                    name: format!("n{j}_{l}"),
                });
            }
        }
    }

    let mut branches = Vec::new();
    let mut connect = |wire: &Wire, on_line: Vec<(f64, usize)>| {
        let inside: Vec<(f64, usize)> = on_line
            .into_iter()
            .filter(|&(c, _)| wire.start - eps <= c && c <= wire.end + eps)
            .collect();
        for pair in inside.windows(2) {
            let length = pair[1].0 - pair[0].0;
            branches.push(Branch {
                a: pair[0].1,
                b: pair[1].1,
                resistance_ohm: tech.resistance(length, wire.width_um),
                width_um: wire.width_um,
                length_um: length,
            });
        }
    };
    for (l, ws) in h_wires.iter().enumerate() {
        for w in ws {
            let on_line = (0..sk.x_lines.len())
                .filter_map(|j| at.get(&(j, l)).map(|&id| (sk.x_lines[j], id)))
                .collect();
            connect(w, on_line);
        }
    }
    for (j, ws) in v_wires.iter().enumerate() {
        for w in ws {
            let on_line = (0..sk.y_lines.len())
                .filter_map(|l| at.get(&(j, l)).map(|&id| (sk.y_lines[l], id)))
                .collect();
            connect(w, on_line);
        }
    }

    let mut counts = vec![0usize; geom.len()];
    for n in &nodes {
        counts[n.tile.expect("layout nodes carry a tile")] += 1;
    }
    let unservable: Vec<usize> = tiles
        .tiles
        .iter()
        .enumerate()
        .filter(|(i, t)| t.current_a > 0.0 && counts[*i] == 0)
        .map(|(i, _)| i)
        .collect();
    if !unservable.is_empty() {
        return Err(Error::UnservableTiles { tiles: unservable });
    }
    let injections = nodes
        .iter()
        .map(|n| {
            let t = n.tile.expect("layout nodes carry a tile");
            tiles.tiles[t].current_a / counts[t] as f64
        })
        .collect();

    if nodes.is_empty() {
        return Err(Error::InvalidNetwork("layout has no wire crossings".into()));
    }
    let pad_ids = place_pads(&nodes, layout, pads);
    PdnGraph::new(nodes, branches, pad_ids, injections, tech.v_dd)
}

fn place_pads(nodes: &[Node], layout: &PdnLayout, spec: &PadSpec) -> Vec<usize> {
    let geom = &layout.geometry;
    let targets: Vec<[f64; 2]> = match spec {
        PadSpec::Corners => {
            let (x0, y0) = (geom.origin_x_um, geom.origin_y_um);
            let (x1, y1) = (x0 + geom.die_w_um(), y0 + geom.die_h_um());
            vec![[x0, y0], [x1, y0], [x0, y1], [x1, y1]]
        }
        PadSpec::Points(p) => p.clone(),
    };
    let mut ids: Vec<usize> = Vec::with_capacity(targets.len());
    for [tx, ty] in targets {
        let nearest = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, (n.x_um - tx).powi(2) + (n.y_um - ty).powi(2)))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            })
            .map(|(i, _)| i)
            .expect("graph has nodes");
        if !ids.contains(&nearest) {
            ids.push(nearest);
        }
    }
    ids
}
