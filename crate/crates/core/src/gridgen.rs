//! Skeleton grid and wire instantiation.
//!
//! The skeleton is a centered comb of candidate wire positions at a fixed
//! pitch in both orientations. Wires are instantiated per tile: a skeleton
//! line produces one segment for every tile it crosses whose class selects
//! it. Selection uses the global line index, so the lines kept by a sparse
//! class are always a subset of those kept by a denser class:
//!
//! | class      | kept line indices |
//! |------------|-------------------|
//! | High       | all               |
//! | Medium     | `i % k == 0`      |
//! | Low, Idle  | `i % 2k == 0`     |
//!
//! Every tile must keep at least one line per orientation; that keeps the
//! mesh connected across class boundaries and gives each tile an
//! intersection to inject its current into.

use serde::{Deserialize, Serialize};

use crate::classify::{ClassMap, TileClass};
use crate::error::{Error, Result};
use crate::floorplan::TileGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Runs along x at a fixed y, one per entry of `y_lines`.
    Horizontal,
    /// Runs along y at a fixed x, one per entry of `x_lines`.
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGrid {
    pub x_lines: Vec<f64>,
    pub y_lines: Vec<f64>,
    pub pitch_um: f64,
}

impl SkeletonGrid {
    pub fn lines(&self, o: Orientation) -> &[f64] {
        match o {
            Orientation::Horizontal => &self.y_lines,
            Orientation::Vertical => &self.x_lines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireWidths {
    pub horizontal_um: f64,
    pub vertical_um: f64,
}

impl Default for WireWidths {
    fn default() -> Self {
        WireWidths {
            horizontal_um: 1.0,
            vertical_um: 1.0,
        }
    }
}

impl WireWidths {
    pub fn get(&self, o: Orientation) -> f64 {
        match o {
            Orientation::Horizontal => self.horizontal_um,
            Orientation::Vertical => self.vertical_um,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutMode {
    Adaptive { k: usize },
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub orientation: Orientation,
    pub line: usize,
    pub tile: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub width_um: f64,
}

impl Segment {
    pub fn length_um(&self) -> f64 {
        (self.end[0] - self.start[0]) + (self.end[1] - self.start[1])
    }

    /// Extent along the wire direction.
    fn span(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::Horizontal => (self.start[0], self.end[0]),
            Orientation::Vertical => (self.start[1], self.end[1]),
        }
    }
}

/// A maximal run of abutting segments on one skeleton line.
#[derive(Debug, Clone, PartialEq)]
pub struct Wire {
    pub orientation: Orientation,
    pub line: usize,
    /// Fixed coordinate: y for horizontal wires, x for vertical.
    pub coord: f64,
    pub start: f64,
    pub end: f64,
    pub width_um: f64,
}

/// Spans `(start, end, width)` of the segments on one skeleton line.
type LineSpans = ((Orientation, usize), Vec<(f64, f64, f64)>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdnLayout {
    pub mode: LayoutMode,
    pub geometry: TileGeometry,
    pub skeleton: SkeletonGrid,
    pub widths: WireWidths,
    /// Sorted by (orientation, line, tile).
    pub segments: Vec<Segment>,
    pub metal_area_um2: f64,
}

impl PdnLayout {
    /// Coalesces abutting segments into continuous wires, ordered by
    /// orientation, line and position.
    pub fn wires(&self) -> Vec<Wire> {
        let eps = 1e-9 * self.geometry.die_w_um().max(self.geometry.die_h_um());
        let mut wires: Vec<Wire> = Vec::new();
        for (key, mut spans) in self.segment_spans() {
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            let coord = self.skeleton.lines(key.0)[key.1];
            for (s, e, w) in spans {
                match wires.last_mut() {
                    Some(last)
                        if last.orientation == key.0
                            && last.line == key.1
                            && s <= last.end + eps =>
                    {
                        last.end = last.end.max(e);
                        last.width_um = last.width_um.min(w);
                    }
                    _ => wires.push(Wire {
                        orientation: key.0,
                        line: key.1,
                        coord,
                        start: s,
                        end: e,
                        width_um: w,
                    }),
                }
            }
        }
        wires
    }

    fn segment_spans(&self) -> Vec<LineSpans> {
        let mut out: Vec<LineSpans> = Vec::new();
        for seg in &self.segments {
            let key = (seg.orientation, seg.line);
            let (s, e) = seg.span();
            match out.last_mut() {
                Some((k, v)) if *k == key => v.push((s, e, seg.width_um)),
                _ => out.push((key, vec![(s, e, seg.width_um)])),
            }
        }
        out
    }

    pub fn segments_in_tile(&self, tile: usize) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.tile == tile)
    }
}

/// Lays out candidate lines at `pitch_um`, centered on the die.
pub fn build_skeleton(geom: &TileGeometry, pitch_um: f64) -> Result<SkeletonGrid> {
    if !(pitch_um > 0.0 && pitch_um.is_finite()) {
        return Err(Error::Domain(format!(
            "pitch must be positive, got {pitch_um}"
        )));
    }
    let min_tile = geom.tile_w_um.min(geom.tile_h_um);
    if pitch_um > min_tile * (1.0 + 1e-12) {
        return Err(Error::Constraint(format!(
            "pitch {pitch_um} µm exceeds the smallest tile dimension {min_tile} µm; \
             pitch must be at most {min_tile} µm for every tile to be crossed by a line"
        )));
    }
    let comb = |origin: f64, extent: f64| -> Vec<f64> {
        let n = ((extent / pitch_um) + 1e-9).floor() as usize;
        let offset = (extent - (n - 1) as f64 * pitch_um) / 2.0;
        (0..n)
            .map(|i| origin + offset + i as f64 * pitch_um)
            .collect()
    };
    Ok(SkeletonGrid {
        x_lines: comb(geom.origin_x_um, geom.die_w_um()),
        y_lines: comb(geom.origin_y_um, geom.die_h_um()),
        pitch_um,
    })
}

fn stride(class: TileClass, k: usize) -> usize {
    match class {
        TileClass::High => 1,
        TileClass::Medium => k,
        TileClass::Low | TileClass::Idle => 2 * k,
    }
}

/// Instantiates wires according to each tile's class.
pub fn instantiate_adaptive(
    sk: &SkeletonGrid,
    cm: &ClassMap,
    geom: &TileGeometry,
    k: usize,
    widths: &WireWidths,
) -> Result<PdnLayout> {
    if k == 0 {
        return Err(Error::Domain(
            "sampling parameter k must be at least 1".into(),
        ));
    }
    if !cm.matches(geom) {
        return Err(Error::Geometry(format!(
            "class map is {} x {}, tile grid is {} x {}",
            cm.nx, cm.ny, geom.nx, geom.ny
        )));
    }
    let strides: Vec<usize> = cm.classes.iter().map(|&c| stride(c, k)).collect();
    instantiate(sk, geom, &strides, widths, LayoutMode::Adaptive { k })
}

/// Instantiates every skeleton line across the whole die.
pub fn instantiate_uniform(
    sk: &SkeletonGrid,
    geom: &TileGeometry,
    widths: &WireWidths,
) -> Result<PdnLayout> {
    instantiate(sk, geom, &vec![1; geom.len()], widths, LayoutMode::Uniform)
}

fn instantiate(
    sk: &SkeletonGrid,
    geom: &TileGeometry,
    strides: &[usize],
    widths: &WireWidths,
    mode: LayoutMode,
) -> Result<PdnLayout> {
    validate_widths(widths)?;
    let rows: Vec<usize> = sk.y_lines.iter().map(|&y| geom.row_of(y)).collect();
    let cols: Vec<usize> = sk.x_lines.iter().map(|&x| geom.column_of(x)).collect();

    let mut h_kept = vec![0usize; geom.len()];
    let mut v_kept = vec![0usize; geom.len()];
    let mut segments = Vec::new();
    for (line, (&y, &row)) in sk.y_lines.iter().zip(&rows).enumerate() {
        for ix in 0..geom.nx {
            let tile = geom.index(ix, row);
            if line % strides[tile] == 0 {
                h_kept[tile] += 1;
                segments.push(Segment {
                    orientation: Orientation::Horizontal,
                    line,
                    tile,
                    start: [geom.x_edge(ix), y],
                    end: [geom.x_edge(ix + 1), y],
                    width_um: widths.horizontal_um,
                });
            }
        }
    }
    for (line, (&x, &col)) in sk.x_lines.iter().zip(&cols).enumerate() {
        for iy in 0..geom.ny {
            let tile = geom.index(col, iy);
            if line % strides[tile] == 0 {
                v_kept[tile] += 1;
                segments.push(Segment {
                    orientation: Orientation::Vertical,
                    line,
                    tile,
                    start: [x, geom.y_edge(iy)],
                    end: [x, geom.y_edge(iy + 1)],
                    width_um: widths.vertical_um,
                });
            }
        }
    }

    let starved: Vec<usize> = (0..geom.len())
        .filter(|&t| h_kept[t] == 0 || v_kept[t] == 0)
        .collect();
    if !starved.is_empty() {
        let worst = starved.iter().map(|&t| strides[t]).max().unwrap_or(1);
        let min_tile = geom.tile_w_um.min(geom.tile_h_um);
        return Err(Error::Constraint(format!(
            "{} tiles keep no wire in some orientation (first tiles: {:?}); \
             a stride of {worst} needs at least {worst} skeleton lines per tile, \
             i.e. pitch <= {} µm",
            starved.len(),
            &starved[..starved.len().min(8)],
            min_tile / worst as f64
        )));
    }

    let mut layout = PdnLayout {
        mode,
        geometry: *geom,
        skeleton: sk.clone(),
        widths: *widths,
        segments,
        metal_area_um2: 0.0,
    };
    layout.metal_area_um2 = metal_area(&layout);
    Ok(layout)
}

fn validate_widths(w: &WireWidths) -> Result<()> {
    if w.horizontal_um > 0.0 && w.vertical_um > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "wire widths must be positive, got {} / {}",
            w.horizontal_um, w.vertical_um
        )))
    }
}

/// Total wire area, counting every point of metal once.
pub fn metal_area(layout: &PdnLayout) -> f64 {
    let mut area = 0.0;
    for (_, mut spans) in layout.segment_spans() {
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = f64::NEG_INFINITY;
        for (s, e, w) in spans {
            let from = s.max(covered);
            if e > from {
                area += (e - from) * w;
            }
            covered = covered.max(e);
        }
    }
    area
}
