//! Sparse lattice configurations over a blank default.

use crate::lattice::{canonical_pattern, Coord, LatticeKind, Region, Symmetry};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration<S> {
    cells: BTreeMap<Coord, S>,
    blank: S,
    lattice: LatticeKind,
}

impl<S: Clone + Eq> Configuration<S> {
    pub fn empty(blank: S, lattice: LatticeKind) -> Self {
        Configuration { cells: BTreeMap::new(), blank, lattice }
    }

    pub fn from_cells(blank: S, lattice: LatticeKind, cells: impl IntoIterator<Item = (Coord, S)>) -> Self {
        let mut cfg = Self::empty(blank, lattice);
        for (c, s) in cells {
            cfg.set(c, s);
        }
        cfg
    }

    pub fn get(&self, c: Coord) -> &S {
        self.cells.get(&c).unwrap_or(&self.blank)
    }

    pub fn set(&mut self, c: Coord, s: S) {
        if s == self.blank {
            self.cells.remove(&c);
        } else {
            self.cells.insert(c, s);
        }
    }

    pub fn with(mut self, c: Coord, s: S) -> Self {
        self.set(c, s);
        self
    }

    pub fn blank(&self) -> &S {
        &self.blank
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    /// Non-blank cells in coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (Coord, &S)> {
        self.cells.iter().map(|(c, s)| (*c, s))
    }

    pub fn support(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_blank(&self, c: Coord) -> bool {
        !self.cells.contains_key(&c)
    }

    pub fn within(&self, rg: &Region) -> bool {
        self.cells.keys().all(|c| rg.contains(*c))
    }

    pub fn touches_boundary(&self, rg: &Region) -> bool {
        self.cells.keys().any(|c| rg.on_boundary(*c))
    }

    /// Cell-wise state map; `None` anywhere makes the whole image undefined.
    pub fn try_map<T: Clone + Eq>(&self, blank: T, mut f: impl FnMut(&S) -> Option<T>) -> Option<Configuration<T>> {
        let mut out = Configuration::empty(blank, self.lattice);
        for (c, s) in &self.cells {
            out.set(*c, f(s)?);
        }
        Some(out)
    }

    pub fn transformed(&self, g: &Symmetry) -> Self {
        Configuration {
            cells: self.cells.iter().map(|(c, s)| (g.apply(*c), s.clone())).collect(),
            blank: self.blank.clone(),
            lattice: self.lattice,
        }
    }

    pub fn translated(&self, dx: i32, dy: i32) -> Self {
        Configuration {
            cells: self.cells.iter().map(|(c, s)| (c.offset((dx, dy)), s.clone())).collect(),
            blank: self.blank.clone(),
            lattice: self.lattice,
        }
    }
}

impl<S: Clone + Eq + Ord> Configuration<S> {
    /// Least symmetric image with the support's bounding-box corner at the origin.
    pub fn canonicalize(&self) -> Self {
        let cells: Vec<(Coord, S)> = self.cells.iter().map(|(c, s)| (*c, s.clone())).collect();
        let canon = canonical_pattern(&cells, self.lattice);
        Configuration::from_cells(self.blank.clone(), self.lattice, canon)
    }
}

impl<S: fmt::Display + Clone + Eq> fmt::Display for Configuration<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (c, s)) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}@{c}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_writes_shrink_support() {
        let mut cfg = Configuration::empty('O', LatticeKind::Square4);
        cfg.set(Coord::ORIGIN, 'A');
        assert_eq!(cfg.len(), 1);
        cfg.set(Coord::ORIGIN, 'O');
        assert!(cfg.is_empty());
        assert_eq!(*cfg.get(Coord::new(4, 4)), 'O');
    }

    #[test]
    fn single_cell_canonical_form_ignores_position() {
        let a = Configuration::empty('O', LatticeKind::Square4).with(Coord::new(3, -7), 'A');
        let b = Configuration::empty('O', LatticeKind::Square4).with(Coord::ORIGIN, 'A');
        assert_eq!(a.canonicalize(), b.canonicalize());
    }

    #[test]
    fn undefined_cell_poisons_image() {
        let cfg = Configuration::empty(0u8, LatticeKind::Square4).with(Coord::ORIGIN, 1).with(Coord::new(1, 0), 2);
        assert!(cfg.try_map(0u8, |s| if *s == 2 { None } else { Some(*s) }).is_none());
        assert_eq!(cfg.try_map(0u8, |s| Some(*s)), Some(cfg.clone()));
    }
}
