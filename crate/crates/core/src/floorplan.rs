//! Die geometry, component placement and the tile partition.
//!
//! Component power is spread over tiles in proportion to the fraction of the
//! component's rectangle that falls inside each tile. Per tile the
//! contributions are accumulated in placement order, which fixes the
//! floating-point summation order for every mapping entry point.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace_io::{ComponentPower, PowerTrace};

/// Axis-aligned rectangle in µm, serialized as `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for Rect {
    fn from([x0, y0, x1, y1]: [f64; 4]) -> Self {
        Rect { x0, y0, x1, y1 }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x0, r.y0, r.x1, r.y1]
    }
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Area of the intersection with `other`, zero when disjoint.
    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Rect::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Die {
    pub w_um: f64,
    pub h_um: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub x_um: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub y_um: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Die {
    pub fn new(w_um: f64, h_um: f64) -> Self {
        Die {
            w_um,
            h_um,
            x_um: 0.0,
            y_um: 0.0,
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(
            self.x_um,
            self.y_um,
            self.x_um + self.w_um,
            self.y_um + self.h_um,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub component: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub die: Die,
    pub placements: Vec<Placement>,
}

const GEOM_EPS: f64 = 1e-9;

impl Floorplan {
    pub fn new(die: Die, placements: Vec<Placement>) -> Result<Self> {
        let fp = Floorplan { die, placements };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.die;
        if !(d.w_um > 0.0 && d.h_um > 0.0 && d.w_um.is_finite() && d.h_um.is_finite()) {
            return Err(Error::InvalidFloorplan(format!(
                "die dimensions must be positive, got {} x {}",
                d.w_um, d.h_um
            )));
        }
        let die = d.rect();
        let eps = GEOM_EPS * d.w_um.max(d.h_um);
        let mut seen = HashSet::new();
        for p in &self.placements {
            let r = p.rect;
            if !seen.insert(p.component.as_str()) {
                return Err(Error::InvalidFloorplan(format!(
                    "component {:?} placed twice",
                    p.component
                )));
            }
            if !(r.x0 < r.x1 && r.y0 < r.y1) {
                return Err(Error::InvalidFloorplan(format!(
                    "component {:?} has degenerate rectangle {:?}",
                    p.component,
                    <[f64; 4]>::from(r)
                )));
            }
            if r.x0 < die.x0 - eps
                || r.y0 < die.y0 - eps
                || r.x1 > die.x1 + eps
                || r.y1 > die.y1 + eps
            {
                return Err(Error::InvalidFloorplan(format!(
                    "component {:?} extends outside the die",
                    p.component
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let fp: Floorplan = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        fp.validate()?;
        Ok(fp)
    }

    pub fn placement(&self, component: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.component == component)
    }
}

/// Tile partition geometry. Tiles are numbered row-major from the die origin:
/// `index = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileGeometry {
    pub origin_x_um: f64,
    pub origin_y_um: f64,
    pub nx: usize,
    pub ny: usize,
    pub tile_w_um: f64,
    pub tile_h_um: f64,
}

impl TileGeometry {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn die_w_um(&self) -> f64 {
        self.nx as f64 * self.tile_w_um
    }

    pub fn die_h_um(&self) -> f64 {
        self.ny as f64 * self.tile_h_um
    }

    /// x coordinate of the `i`-th vertical tile boundary, `0..=nx`.
    pub fn x_edge(&self, i: usize) -> f64 {
        if i == self.nx {
            self.origin_x_um + self.die_w_um()
        } else {
            self.origin_x_um + i as f64 * self.tile_w_um
        }
    }

    pub fn y_edge(&self, i: usize) -> f64 {
        if i == self.ny {
            self.origin_y_um + self.die_h_um()
        } else {
            self.origin_y_um + i as f64 * self.tile_h_um
        }
    }

    pub fn tile_rect(&self, index: usize) -> Rect {
        let (ix, iy) = self.coords(index);
        Rect::new(
            self.x_edge(ix),
            self.y_edge(iy),
            self.x_edge(ix + 1),
            self.y_edge(iy + 1),
        )
    }

    /// Tile column holding `x`, using half-open tiles clamped to the die.
    pub fn column_of(&self, x: f64) -> usize {
        cell_of(x - self.origin_x_um, self.tile_w_um, self.nx)
    }

    pub fn row_of(&self, y: f64) -> usize {
        cell_of(y - self.origin_y_um, self.tile_h_um, self.ny)
    }

    pub fn tile_area_um2(&self) -> f64 {
        self.tile_w_um * self.tile_h_um
    }
}

fn cell_of(offset: f64, size: f64, n: usize) -> usize {
    let c = (offset / size).floor();
    if c <= 0.0 {
        0
    } else {
        (c as usize).min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tile {
    pub power_w: f64,
    pub area_um2: f64,
    pub density_w_per_um2: f64,
    pub current_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileGrid {
    pub geometry: TileGeometry,
    pub tiles: Vec<Tile>,
}

impl TileGrid {
    pub fn powers(&self) -> Vec<f64> {
        self.tiles.iter().map(|t| t.power_w).collect()
    }

    pub fn total_power_w(&self) -> f64 {
        self.tiles.iter().map(|t| t.power_w).sum()
    }

    pub fn total_current_a(&self) -> f64 {
        self.tiles.iter().map(|t| t.current_a).sum()
    }

    /// Replaces tile powers and recomputes density and current demand.
    pub fn with_powers(&self, powers: &[f64], v_dd: f64) -> Result<TileGrid> {
        if powers.len() != self.tiles.len() {
            return Err(Error::Geometry(format!(
                "{} powers for {} tiles",
                powers.len(),
                self.tiles.len()
            )));
        }
        let area = self.geometry.tile_area_um2();
        let tiles = powers
            .iter()
            .map(|&p| {
                Ok(Tile {
                    power_w: p,
                    area_um2: area,
                    density_w_per_um2: p / area,
                    current_a: current_demand(p, v_dd)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TileGrid {
            geometry: self.geometry,
            tiles,
        })
    }
}

/// Splits the die into `nx × ny` equal tiles with zero power.
pub fn partition(fp: &Floorplan, nx: usize, ny: usize) -> Result<TileGrid> {
    if nx == 0 || ny == 0 {
        return Err(Error::Domain(format!(
            "tile counts must be positive, got {nx} x {ny}"
        )));
    }
    let geometry = TileGeometry {
        origin_x_um: fp.die.x_um,
        origin_y_um: fp.die.y_um,
        nx,
        ny,
        tile_w_um: fp.die.w_um / nx as f64,
        tile_h_um: fp.die.h_um / ny as f64,
    };
    if (geometry.die_w_um() - fp.die.w_um).abs() > 1e-6
        || (geometry.die_h_um() - fp.die.h_um).abs() > 1e-6
    {
        return Err(Error::Domain(format!(
            "die {} x {} µm does not divide into {nx} x {ny} tiles",
            fp.die.w_um, fp.die.h_um
        )));
    }
    let area = geometry.tile_area_um2();
    let tiles = vec![
        Tile {
            area_um2: area,
            ..Tile::default()
        };
        geometry.len()
    ];
    Ok(TileGrid { geometry, tiles })
}

/// Fractions of each placement's area falling into each tile, in placement
/// order and row-major tile order within a placement.
pub(crate) struct Apportionment {
    pub(crate) weights: Vec<Vec<(usize, f64)>>,
}

impl Apportionment {
    pub(crate) fn new(fp: &Floorplan, geom: &TileGeometry) -> Self {
        let weights = fp
            .placements
            .iter()
            .map(|p| overlap_fractions(&p.rect, geom))
            .collect();
        Apportionment { weights }
    }

    /// Accumulates per-placement powers into tile powers.
    pub(crate) fn apply(&self, placement_power: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (w, &p) in self.weights.iter().zip(placement_power) {
            for &(tile, frac) in w {
                out[tile] += p * frac;
            }
        }
    }
}

/// Non-zero overlap fractions `overlap(rect, tile) / area(rect)` for the tiles
/// a rectangle touches, in row-major tile order.
pub fn overlap_fractions(rect: &Rect, geom: &TileGeometry) -> Vec<(usize, f64)> {
    let area = rect.area();
    let (cx0, cx1) = (geom.column_of(rect.x0), geom.column_of(rect.x1));
    let (cy0, cy1) = (geom.row_of(rect.y0), geom.row_of(rect.y1));
    let mut out = Vec::new();
    for iy in cy0..=cy1 {
        for ix in cx0..=cx1 {
            let idx = geom.index(ix, iy);
            let ov = rect.overlap_area(&geom.tile_rect(idx));
            if ov > 0.0 {
                out.push((idx, ov / area));
            }
        }
    }
    out
}

/// Index of each power entry's placement, rejecting unplaced and duplicate
/// components. Placements without an entry get zero power.
fn placement_powers<'a>(
    fp: &Floorplan,
    entries: impl IntoIterator<Item = (&'a str, Option<usize>)>,
) -> Result<Vec<Option<usize>>> {
    let index: HashMap<&str, usize> = fp
        .placements
        .iter()
        .enumerate()
        .map(|(i, p)| (p.component.as_str(), i))
        .collect();
    let mut slot = vec![None; fp.placements.len()];
    let mut unplaced = Vec::new();
    let mut dups = Vec::new();
    for (name, src) in entries {
        match index.get(name) {
            Some(&i) => {
                if slot[i].is_some() {
                    dups.push(name.to_string());
                }
                slot[i] = src;
            }
            None => unplaced.push(name.to_string()),
        }
    }
    if !unplaced.is_empty() {
        return Err(Error::UnplacedComponents(unplaced));
    }
    if !dups.is_empty() {
        return Err(Error::DuplicatePower(dups));
    }
    Ok(slot)
}

/// Assigns component powers to tiles by area-proportional overlap, then fills
/// in density and current demand.
pub fn map_power(
    tiles: &TileGrid,
    fp: &Floorplan,
    powers: &[ComponentPower],
    v_dd: f64,
) -> Result<TileGrid> {
    let slots = placement_powers(
        fp,
        powers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.component.as_str(), Some(i))),
    )?;
    let per_placement: Vec<f64> = slots
        .iter()
        .map(|s| s.map_or(0.0, |i| powers[i].power_w))
        .collect();
    let plan = Apportionment::new(fp, &tiles.geometry);
    let mut out = vec![0.0; tiles.geometry.len()];
    plan.apply(&per_placement, &mut out);
    tiles.with_powers(&out, v_dd)
}

/// Per-tile maximum over time of the spatially mapped power. The maximum is
/// taken after mapping each step, so a tile's peak can exceed what any single
/// chip-wide snapshot would suggest for it.
pub fn tile_peak_power(
    trace: &PowerTrace,
    fp: &Floorplan,
    tiles: &TileGrid,
    v_dd: f64,
) -> Result<TileGrid> {
    if trace.num_steps() == 0 {
        return Err(Error::Domain("cannot take peaks of an empty trace".into()));
    }
    let slots = placement_powers(
        fp,
        trace
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), Some(i))),
    )?;
    let plan = Apportionment::new(fp, &tiles.geometry);
    let n = tiles.geometry.len();
    let mut peak = vec![0.0f64; n];
    let mut step = vec![0.0; n];
    let mut per_placement = vec![0.0; slots.len()];
    for row in trace.samples() {
        for (dst, s) in per_placement.iter_mut().zip(&slots) {
            *dst = s.map_or(0.0, |i| row[i]);
        }
        plan.apply(&per_placement, &mut step);
        for (p, &s) in peak.iter_mut().zip(&step) {
            if s > *p {
                *p = s;
            }
        }
    }
    tiles.with_powers(&peak, v_dd)
}

/// Current drawn from the supply, `P / V_dd`.
pub fn current_demand(power_w: f64, v_dd: f64) -> Result<f64> {
    if !(v_dd > 0.0) {
        return Err(Error::Domain(format!("V_dd must be positive, got {v_dd}")));
    }
    if power_w < 0.0 {
        return Err(Error::Domain(format!(
            "power must be non-negative, got {power_w}"
        )));
    }
    Ok(power_w / v_dd)
}
