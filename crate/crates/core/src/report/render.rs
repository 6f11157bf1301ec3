use std::fmt::Write;

use crate::classify::ClassMap;
use crate::gridgen::{Orientation, PdnLayout};

fn heat(p: f64) -> String {
    let p = p.clamp(0.0, 1.0);
    let r = 255.0;
    let g = 255.0 * (1.0 - 0.8 * p);
    let b = 255.0 * (1.0 - p);
    format!("rgb({:.0},{:.0},{:.0})", r, g, b)
}

/// Draws tiles shaded by normalized power, the layout's wires and the pads.
/// The y axis points up as in layout coordinates.
pub fn render_svg(layout: &PdnLayout, cm: &ClassMap, pads: &[[f64; 2]]) -> String {
    let g = &layout.geometry;
    let (w, h) = (g.die_w_um(), g.die_h_um());
    let (ox, oy) = (g.origin_x_um, g.origin_y_um);
    let fy = |y: f64| h - (y - oy);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    let _ = writeln!(
        s,
        r##"<g id="tiles" stroke="#999999" stroke-width="{:.3}">"##,
        w / 2000.0
    );
    for i in 0..g.len() {
        let r = g.tile_rect(i);
        let p = cm.p.get(i).copied().unwrap_or(0.0);
        let class = cm.classes.get(i).map(|c| c.code()).unwrap_or('I');
        let _ = writeln!(
            s,
            r#"<rect class="tile" data-tile="{i}" data-class="{class}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            r.x0 - ox,
            fy(r.y1),
            r.width(),
            r.height(),
            heat(p)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="wires" fill="#1f3b73">"##);
    for seg in &layout.segments {
        let (x0, x1) = (seg.start[0].min(seg.end[0]), seg.start[0].max(seg.end[0]));
        let (y0, y1) = (seg.start[1].min(seg.end[1]), seg.start[1].max(seg.end[1]));
        let half = seg.width_um / 2.0;
        let (x, y, rw, rh) = match seg.orientation {
            Orientation::Horizontal => (x0, y1 + half, x1 - x0, seg.width_um),
            Orientation::Vertical => (x0 - half, y1, seg.width_um, y1 - y0),
        };
        let _ = writeln!(
            s,
            r#"<rect class="wire" data-tile="{}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
            seg.tile,
            x - ox,
            fy(y),
            rw,
            rh
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="pads" fill="#c0392b">"##);
    let radius = w.max(h) / 100.0;
    for [x, y] in pads {
        let _ = writeln!(
            s,
            r#"<circle class="pad" cx="{:.3}" cy="{:.3}" r="{radius:.3}"/>"#,
            x - ox,
            fy(*y)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
