//! Coordinates, neighborhoods and lattice symmetries.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const ORIGIN: Coord = Coord { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub fn offset(self, d: (i32, i32)) -> Coord {
        Coord::new(self.x + d.0, self.y + d.1)
    }

    pub fn max_norm(self) -> i32 {
        self.x.abs().max(self.y.abs())
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Square lattice directions in N, E, S, W order.
pub const SQUARE_OFFSETS: [(i32, i32); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

/// Triangular lattice on axial coordinates, clockwise from global right.
pub const TRI_OFFSETS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

pub const N: u8 = 0;
pub const E: u8 = 1;
pub const S: u8 = 2;
pub const W: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    Square4,
    Triangular6,
}

impl LatticeKind {
    pub fn degree(self) -> u8 {
        match self {
            LatticeKind::Square4 => 4,
            LatticeKind::Triangular6 => 6,
        }
    }

    pub fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            LatticeKind::Square4 => &SQUARE_OFFSETS,
            LatticeKind::Triangular6 => &TRI_OFFSETS,
        }
    }

    pub fn step(self, c: Coord, d: u8) -> Coord {
        c.offset(self.offsets()[d as usize])
    }

    pub fn neighbors(self, c: Coord) -> Vec<Coord> {
        self.offsets().iter().map(|&o| c.offset(o)).collect()
    }

    pub fn opposite(self, d: u8) -> u8 {
        (d + self.degree() / 2) % self.degree()
    }

    /// Direction index taking `a` to its neighbor `b`.
    pub fn dir_between(self, a: Coord, b: Coord) -> Option<u8> {
        let delta = (b.x - a.x, b.y - a.y);
        self.offsets().iter().position(|&o| o == delta).map(|d| d as u8)
    }

    pub fn adjacent(self, a: Coord, b: Coord) -> bool {
        self.dir_between(a, b).is_some()
    }

    pub fn symmetries(self) -> Vec<Symmetry> {
        let rots = self.degree();
        let mut out = Vec::with_capacity(2 * rots as usize);
        for reflect in [false, true] {
            for rot in 0..rots {
                out.push(Symmetry { kind: self, rot, reflect });
            }
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square4 => "square",
            LatticeKind::Triangular6 => "triangular",
        }
    }
}

/// Point symmetry fixing the origin: optional reflection, then `rot` clockwise turns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Symmetry {
    pub kind: LatticeKind,
    pub rot: u8,
    pub reflect: bool,
}

impl Symmetry {
    pub fn identity(kind: LatticeKind) -> Self {
        Symmetry { kind, rot: 0, reflect: false }
    }

    pub fn apply(&self, c: Coord) -> Coord {
        let (mut x, mut y) = (c.x, c.y);
        match self.kind {
            LatticeKind::Square4 => {
                if self.reflect {
                    x = -x;
                }
                for _ in 0..self.rot {
                    (x, y) = (y, -x);
                }
            }
            LatticeKind::Triangular6 => {
                if self.reflect {
                    (x, y) = (x + y, -y);
                }
                for _ in 0..self.rot {
                    (x, y) = (x + y, -x);
                }
            }
        }
        Coord::new(x, y)
    }

    pub fn apply_dir(&self, d: u8) -> u8 {
        let n = self.kind.degree();
        let d = if self.reflect { (n - d) % n } else { d };
        (d + self.rot) % n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub radius: i32,
}

impl Region {
    pub fn new(radius: i32) -> Self {
        Region { radius: radius.max(0) }
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.max_norm() <= self.radius
    }

    pub fn on_boundary(&self, c: Coord) -> bool {
        c.max_norm() == self.radius
    }

    /// Cells in row-major order, bottom row first.
    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        let r = self.radius;
        (-r..=r).flat_map(move |y| (-r..=r).map(move |x| Coord::new(x, y)))
    }

    pub fn len(&self) -> usize {
        let side = (2 * self.radius + 1) as usize;
        side * side
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The 9 cells within max-norm distance 1 of `u`.
pub fn block(u: Coord) -> Vec<Coord> {
    let mut out = Vec::with_capacity(9);
    for dy in -1..=1 {
        for dx in -1..=1 {
            out.push(Coord::new(u.x + dx, u.y + dy));
        }
    }
    out
}

/// Least image of a finite pattern under all lattice symmetries, translated so the
/// bounding box corner sits at the origin. Cells are compared in row-major order.
pub fn canonical_pattern<T: Ord + Clone>(cells: &[(Coord, T)], kind: LatticeKind) -> Vec<(Coord, T)> {
    let mut best: Option<Vec<((i32, i32), T)>> = None;
    for g in kind.symmetries() {
        let moved: Vec<(Coord, T)> = cells.iter().map(|(c, t)| (g.apply(*c), t.clone())).collect();
        let min_x = moved.iter().map(|(c, _)| c.x).min().unwrap_or(0);
        let min_y = moved.iter().map(|(c, _)| c.y).min().unwrap_or(0);
        let mut key: Vec<((i32, i32), T)> =
            moved.into_iter().map(|(c, t)| ((c.y - min_y, c.x - min_x), t)).collect();
        key.sort();
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default().into_iter().map(|((y, x), t)| (Coord::new(x, y), t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_neighbors_in_compass_order() {
        let n = LatticeKind::Square4.neighbors(Coord::new(2, -1));
        assert_eq!(n, vec![Coord::new(2, 0), Coord::new(3, -1), Coord::new(2, -2), Coord::new(1, -1)]);
    }

    #[test]
    fn triangular_neighbors_start_right_and_turn_clockwise() {
        let n = LatticeKind::Triangular6.neighbors(Coord::ORIGIN);
        assert_eq!(n[0], Coord::new(1, 0));
        assert_eq!(n.len(), 6);
        // embed axial coordinates in the plane and check the winding
        let angle = |c: &Coord| {
            let px = c.x as f64 + c.y as f64 / 2.0;
            let py = c.y as f64 * 3f64.sqrt() / 2.0;
            py.atan2(px)
        };
        for w in n.windows(2) {
            let mut turn = angle(&w[0]) - angle(&w[1]);
            if turn < 0.0 {
                turn += std::f64::consts::TAU;
            }
            assert!((turn - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
        }
    }

    #[test]
    fn blocks_overlap_in_a_column() {
        let a = block(Coord::ORIGIN);
        let b = block(Coord::new(2, 0));
        let both: Vec<_> = a.iter().filter(|c| b.contains(c)).copied().collect();
        assert_eq!(both, vec![Coord::new(1, -1), Coord::new(1, 0), Coord::new(1, 1)]);
        assert_eq!(block(Coord::new(5, 5)), a.iter().map(|c| c.offset((5, 5))).collect::<Vec<_>>());
    }

    #[test]
    fn mirror_trominoes_share_a_form() {
        let l = [(Coord::new(0, 0), 1), (Coord::new(1, 0), 1), (Coord::new(0, 1), 1)];
        let m = [(Coord::new(0, 0), 1), (Coord::new(-1, 0), 1), (Coord::new(0, 1), 1)];
        assert_eq!(canonical_pattern(&l, LatticeKind::Square4), canonical_pattern(&m, LatticeKind::Square4));
    }

    #[test]
    fn asymmetric_pattern_has_one_form_over_its_images() {
        let p = [(Coord::new(0, 0), 'a'), (Coord::new(1, 0), 'b'), (Coord::new(1, 1), 'c')];
        // oracle: take every image by brute force and pick the least sorted key
        let mut images = Vec::new();
        for g in LatticeKind::Square4.symmetries() {
            let img: Vec<_> = p.iter().map(|(c, t)| (g.apply(*c), *t)).collect();
            images.push(canonical_pattern(&img, LatticeKind::Square4));
        }
        images.dedup();
        assert_eq!(images.len(), 1);
    }

    #[test]
    fn symmetry_directions_track_coordinates() {
        for kind in [LatticeKind::Square4, LatticeKind::Triangular6] {
            for g in kind.symmetries() {
                for d in 0..kind.degree() {
                    let moved = g.apply(kind.step(Coord::ORIGIN, d));
                    assert_eq!(moved, kind.step(Coord::ORIGIN, g.apply_dir(d)));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn neighbor_relation_is_symmetric(x in -50i32..50, y in -50i32..50, tri in any::<bool>()) {
            let kind = if tri { LatticeKind::Triangular6 } else { LatticeKind::Square4 };
            let c = Coord::new(x, y);
            let ns = kind.neighbors(c);
            prop_assert!(!ns.contains(&c));
            prop_assert_eq!(ns.len(), kind.degree() as usize);
            for n in ns {
                prop_assert!(kind.neighbors(n).contains(&c));
            }
        }

        #[test]
        fn canonical_form_ignores_symmetry(
            cells in proptest::collection::btree_map((-3i32..3, -3i32..3), 0u8..3, 1..6),
            tri in any::<bool>(),
            pick in 0usize..12,
            dx in -5i32..5, dy in -5i32..5,
        ) {
            let kind = if tri { LatticeKind::Triangular6 } else { LatticeKind::Square4 };
            let syms = kind.symmetries();
            let g = syms[pick % syms.len()];
            let p: Vec<_> = cells.iter().map(|(&(x, y), &t)| (Coord::new(x, y), t)).collect();
            let q: Vec<_> = p.iter().map(|(c, t)| (g.apply(*c).offset((dx, dy)), *t)).collect();
            let a = canonical_pattern(&p, kind);
            prop_assert_eq!(&a, &canonical_pattern(&q, kind));
            prop_assert_eq!(canonical_pattern(&a, kind), a);
        }
    }
}
