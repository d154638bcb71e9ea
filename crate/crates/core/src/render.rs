//! SVG drawings of configuration snapshots.

use crate::lattice::{Coord, LatticeKind, Region};
use crate::trace::Snapshot;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

const UNIT: f64 = 40.0;

/// Leading identifier of a state name, so `A^3` and `A[1->2]` share a color.
pub fn family(label: &str) -> &str {
    let end = label.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(label.len());
    if end == 0 {
        label
    } else {
        &label[..end]
    }
}

pub fn color(label: &str) -> String {
    let h = Sha256::digest(family(label).as_bytes());
    let hue = u16::from_be_bytes([h[0], h[1]]) % 360;
    format!("hsl({hue},65%,72%)")
}

fn center(kind: LatticeKind, c: Coord) -> (f64, f64) {
    match kind {
        LatticeKind::Square4 => (c.x as f64 * UNIT, -(c.y as f64) * UNIT),
        LatticeKind::Triangular6 => ((c.x as f64 + c.y as f64 / 2.0) * UNIT, -(c.y as f64) * UNIT * 3f64.sqrt() / 2.0),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Draws `snap` over the empty grid of radius `radius`, or of the smallest
/// radius holding every cell.
pub fn svg(snap: &Snapshot, radius: Option<i32>) -> String {
    let kind = snap.lattice;
    let r = radius.unwrap_or_else(|| snap.cells.iter().map(|(c, _)| c.max_norm()).max().unwrap_or(0).max(1));
    let grid: Vec<Coord> = Region::new(r).cells().collect();
    let pts: Vec<(f64, f64)> = grid.iter().chain(snap.cells.iter().map(|(c, _)| c)).map(|c| center(kind, *c)).collect();
    let pad = UNIT;
    let min_x = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - pad;
    let max_x = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + pad;
    let min_y = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - pad;
    let max_y = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + pad;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{min_x:.1} {min_y:.1} {:.1} {:.1}" font-family="monospace" font-size="9">"#,
        max_x - min_x,
        max_y - min_y
    );
    let half = UNIT / 2.0 - 1.0;
    let _ = writeln!(s, r##"<g class="grid" fill="none" stroke="#ddd">"##);
    for c in &grid {
        let (x, y) = center(kind, *c);
        match kind {
            LatticeKind::Square4 => {
                let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}"/>"#, x - half, y - half, 2.0 * half, 2.0 * half);
            }
            LatticeKind::Triangular6 => {
                let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{half:.1}"/>"#);
            }
        }
    }
    let _ = writeln!(s, "</g>");
    for (t, h) in &snap.links {
        let (a, b) = center(kind, *t);
        let (c, d) = center(kind, *h);
        let _ = writeln!(s, r##"<line class="link" x1="{a:.1}" y1="{b:.1}" x2="{c:.1}" y2="{d:.1}" stroke="#333" stroke-width="6"/>"##);
    }
    for (c, label) in &snap.cells {
        let (x, y) = center(kind, *c);
        let fill = color(label);
        match kind {
            LatticeKind::Square4 => {
                let _ = writeln!(
                    s,
                    r##"<rect class="cell" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}" stroke="#555"/>"##,
                    x - half,
                    y - half,
                    2.0 * half,
                    2.0 * half
                );
            }
            LatticeKind::Triangular6 => {
                let _ = writeln!(s, r##"<circle class="cell" cx="{x:.1}" cy="{y:.1}" r="{half:.1}" fill="{fill}" stroke="#555"/>"##);
            }
        }
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y + 3.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(s: &str, pat: &str) -> usize {
        s.matches(pat).count()
    }

    #[test]
    fn blank_config_is_an_empty_grid() {
        let s = svg(&Snapshot { lattice: LatticeKind::Square4, cells: vec![], links: vec![] }, Some(1));
        assert_eq!(count(&s, r#"class="cell""#), 0);
        assert_eq!(count(&s, "<rect"), 9);
    }

    #[test]
    fn colored_block_has_nine_labelled_squares() {
        let cells = Region::new(1).cells().enumerate().map(|(i, c)| (c, format!("s^{}", i + 1))).collect();
        let s = svg(&Snapshot { lattice: LatticeKind::Square4, cells, links: vec![] }, None);
        assert_eq!(count(&s, r#"<rect class="cell""#), 9);
        assert_eq!(count(&s, "<text"), 9);
        assert!(s.contains(">s^5<"));
    }

    #[test]
    fn expanded_particle_is_a_linked_pair() {
        let snap = Snapshot {
            lattice: LatticeKind::Triangular6,
            cells: vec![(Coord::ORIGIN, "p".into()), (Coord::new(1, 0), "p".into())],
            links: vec![(Coord::new(1, 0), Coord::ORIGIN)],
        };
        let s = svg(&snap, None);
        assert_eq!(count(&s, r#"<circle class="cell""#), 2);
        assert_eq!(count(&s, r#"class="link""#), 1);
    }

    #[test]
    fn families_share_colors() {
        assert_eq!(color("A^3"), color("A[1->2]"));
        assert_eq!(family("chi[1->2]"), "chi");
        assert_eq!(family("^x"), "^x");
    }
}
