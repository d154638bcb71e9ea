//! Compiles a unit-seeded directed sCRN into a unit-seeded plain sCRN by
//! coloring 3x3 blocks on the fly.

use crate::compile::{Compiled, Provenance, RuleSet};
use crate::config::Configuration;
use crate::lattice::{block, Coord, LatticeKind};
use crate::scrn::{Flavor, Orient, Reaction, ScrnError, ScrnSystem, Species};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientError {
    #[error("source must be a directed sCRN")]
    NotDirected,
    #[error("source must be unit-seeded")]
    NotUnitSeeded,
    #[error("generated rule families cannot be compiled")]
    Generated,
    #[error("reaction {0} is not a growing reaction")]
    NotGrowing(String),
    #[error(transparent)]
    Scrn(#[from] ScrnError),
}

/// Species used while orienting the seed block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boot {
    Zero,
    One,
    X,
    Y,
    Z,
    Two,
    Three,
    Four,
    Five,
}

impl fmt::Display for Boot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Boot::Zero => "0",
            Boot::One => "1",
            Boot::X => "X",
            Boot::Y => "Y",
            Boot::Z => "Z",
            Boot::Two => "2",
            Boot::Three => "3",
            Boot::Four => "4",
            Boot::Five => "5",
        };
        write!(f, "@{s}")
    }
}

/// States of the compiled system. Colors are 1..=9.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Colored<S> {
    Blank,
    /// Uncolored source species; only the seed.
    Raw(S),
    Boot(Boot),
    BlankColored(u8),
    Species(S, u8),
    Chi(u8),
    Pair(u8, u8),
    Sub(u8, u8),
    SubP(u8, u8),
    Bits(u8, u8, bool, bool),
}

impl<S> Colored<S> {
    pub fn color(&self) -> Option<u8> {
        match self {
            Colored::BlankColored(j) | Colored::Species(_, j) | Colored::Chi(j) => Some(*j),
            Colored::Sub(_, j) | Colored::SubP(_, j) | Colored::Bits(_, j, _, _) => Some(*j),
            _ => None,
        }
    }
}

impl<S: fmt::Display> fmt::Display for Colored<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colored::Blank => f.write_str("O"),
            Colored::Raw(s) => write!(f, "{s}"),
            Colored::Boot(b) => write!(f, "{b}"),
            Colored::BlankColored(i) => write!(f, "O^{i}"),
            Colored::Species(s, i) => write!(f, "{s}^{i}"),
            Colored::Chi(i) => write!(f, "chi^{i}"),
            Colored::Pair(i, j) => write!(f, "chi[{i}{j}]"),
            Colored::Sub(i, j) => write!(f, "chi[{i}->{j}]"),
            Colored::SubP(i, j) => write!(f, "chi[{i}->{j}]p"),
            Colored::Bits(i, j, a, b) => write!(f, "chi[{i}->{j}]{}{}", *a as u8, *b as u8),
        }
    }
}

/// A permutation of the colors 1..=9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Perm(pub [u8; 9]);

impl Perm {
    pub const ID: Perm = Perm([1, 2, 3, 4, 5, 6, 7, 8, 9]);
    pub const RIGHT: Perm = Perm([2, 3, 1, 5, 6, 4, 8, 9, 7]);
    pub const LEFT: Perm = Perm([3, 1, 2, 6, 4, 5, 9, 7, 8]);
    pub const UP: Perm = Perm([4, 5, 6, 7, 8, 9, 1, 2, 3]);
    pub const DOWN: Perm = Perm([7, 8, 9, 1, 2, 3, 4, 5, 6]);
    pub const ROT: [Perm; 4] = [
        Perm::ID,
        Perm([3, 6, 9, 2, 5, 8, 1, 4, 7]),
        Perm([9, 8, 7, 6, 5, 4, 3, 2, 1]),
        Perm([7, 4, 1, 8, 5, 2, 9, 6, 3]),
    ];

    pub fn apply(&self, i: u8) -> u8 {
        self.0[i as usize - 1]
    }

    /// `self` after `inner`.
    pub fn after(&self, inner: &Perm) -> Perm {
        Perm(std::array::from_fn(|k| self.apply(inner.0[k])))
    }

    pub fn is_bijection(&self) -> bool {
        let set: BTreeSet<u8> = self.0.iter().copied().collect();
        set.len() == 9 && set.iter().all(|&x| (1..=9).contains(&x))
    }
}

/// The nine block translations with their names.
pub fn translations() -> [(&'static str, Perm); 9] {
    [
        ("id", Perm::ID),
        ("r", Perm::RIGHT),
        ("l", Perm::LEFT),
        ("u", Perm::UP),
        ("d", Perm::DOWN),
        ("u.r", Perm::UP.after(&Perm::RIGHT)),
        ("u.l", Perm::UP.after(&Perm::LEFT)),
        ("d.r", Perm::DOWN.after(&Perm::RIGHT)),
        ("d.l", Perm::DOWN.after(&Perm::LEFT)),
    ]
}

/// Rotation index for a global direction: E=1, N=2, W=3, S=4.
pub fn rotation_for(dir: u8) -> usize {
    match dir {
        1 => 1,
        0 => 2,
        3 => 3,
        _ => 4,
    }
}

/// The family of permutations for a rotation index 1..=4, named.
pub fn family(k: usize) -> Vec<(String, Perm)> {
    let rot = Perm::ROT[k - 1];
    translations().into_iter().map(|(n, t)| (format!("{n}.rot{k}"), t.after(&rot))).collect()
}

/// Color of a cell in the reference tiling.
pub fn reference_color(c: Coord) -> u8 {
    (1 + c.x.rem_euclid(3) + 3 * c.y.rem_euclid(3)) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OrientMutation {
    #[default]
    None,
    /// The final growing rule writes its products in swapped order.
    SwapFinalProducts,
}

pub const BOOTSTRAP: &str = "orientation";
pub const GROWING: &str = "growing";
pub const TRANSITIONS: &str = "transitions";

/// Reactions coloring the seed block.
pub fn emit_bootstrap<S: Species>(seed: &S, out: &mut RuleSet<Colored<S>>) {
    use Boot::*;
    use Colored::{Blank as O, BlankColored as Oc};
    let b = Colored::Boot;
    let mut add = |item: u8, a: Colored<S>, bb: Colored<S>, c: Colored<S>, d: Colored<S>| {
        out.push(Reaction::Bi { a, b: bb, c, d, orient: Orient::Undirected }, &Provenance::new(BOOTSTRAP, item, ""));
    };
    add(1, Colored::Raw(seed.clone()), O, b(Zero), b(One));
    add(2, b(Zero), O, b(Zero), b(X));
    add(2, b(One), O, b(One), b(Y));
    add(2, b(X), b(Y), b(Two), b(Three));
    add(3, b(Two), O, b(Two), b(Z));
    add(3, b(Z), b(X), b(Four), b(Five));
    add(3, b(Z), b(Five), Oc(1), Oc(2));
    add(4, Oc(2), b(Four), Oc(2), Oc(3));
    add(4, Oc(3), b(Two), Oc(3), Oc(6));
    add(4, Oc(6), b(Three), Oc(6), Oc(9));
    add(4, Oc(9), b(One), Oc(9), Oc(8));
    add(4, Oc(8), b(Three), Oc(8), Oc(7));
    add(4, Oc(7), b(Two), Oc(7), Oc(4));
    add(4, Oc(4), b(Zero), Oc(4), Colored::Species(seed.clone(), 5));
    add(5, Oc(8), b(Y), Oc(8), O);
    add(5, Oc(6), b(Z), Oc(6), O);
    add(5, Oc(4), b(Z), Oc(4), O);
}

/// Every colored state of color `j`.
pub fn colored_of<S: Species>(j: u8, nonblank: &[S]) -> Vec<Colored<S>> {
    let mut v: Vec<Colored<S>> = nonblank.iter().map(|s| Colored::Species(s.clone(), j)).collect();
    v.push(Colored::BlankColored(j));
    v.push(Colored::Chi(j));
    for i in 1..=9 {
        v.push(Colored::Sub(i, j));
        v.push(Colored::SubP(i, j));
        for a in [false, true] {
            for b in [false, true] {
                v.push(Colored::Bits(i, j, a, b));
            }
        }
    }
    v
}

/// `x` with color `i`; a blank becomes a colored blank.
fn paint<S: Species>(x: &S, i: u8, blank: &S) -> Colored<S> {
    if x == blank {
        Colored::BlankColored(i)
    } else {
        Colored::Species(x.clone(), i)
    }
}

/// The growing-reaction family for one permutation.
#[allow(clippy::too_many_arguments)]
pub fn emit_growing_for<S: Species>(
    a: &S,
    b: &S,
    c: &S,
    pi: &Perm,
    label: &str,
    nonblank: &[S],
    mutation: OrientMutation,
    out: &mut RuleSet<Colored<S>>,
) {
    use Colored::*;
    let p = |i: u8| pi.apply(i);
    let (p1, p2, p3, p4, p5, p6, p7, p8, p9) = (p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9));
    let bits = [false, true];
    let mut add = |item: u8, ra: Colored<S>, rb: Colored<S>, rc: Colored<S>, rd: Colored<S>| {
        out.push(Reaction::Bi { a: ra, b: rb, c: rc, d: rd, orient: Orient::Undirected }, &Provenance::new(GROWING, item, label));
    };
    let sp = |s: &S, i: u8| Species(s.clone(), i);

    add(1, sp(a, p1), BlankColored(p2), sp(a, p1), Sub(p1, p2));

    for s in nonblank {
        add(2, Sub(p1, p2), sp(s, p3), Chi(p2), sp(s, p3));
    }
    add(2, Sub(p1, p2), Chi(p3), Chi(p2), Chi(p3));

    for x in [Blank, BlankColored(p3), Sub(p6, p3), Sub(p9, p3)] {
        add(3, Sub(p1, p2), x, SubP(p1, p2), Bits(p2, p3, false, false));
    }

    add(4, Sub(p1, p2), Sub(p1, p3), Chi(p2), Chi(p3));

    for bb in bits {
        add(5, Bits(p2, p3, false, bb), Blank, Bits(p2, p3, false, bb), Pair(p2, p3));
        add(5, Bits(p2, p3, bb, false), Blank, Bits(p2, p3, bb, false), Pair(p2, p3));
    }
    for x in colored_of(p5, nonblank) {
        add(5, Pair(p2, p3), x.clone(), BlankColored(p6), x);
    }
    for x in colored_of(p8, nonblank) {
        add(5, Pair(p2, p3), x.clone(), BlankColored(p9), x);
    }

    for bb in bits {
        for x in [Pair(p3, p9), Pair(p4, p5), Pair(p5, p4)] {
            add(6, Bits(p2, p3, false, bb), x, Bits(p2, p3, true, bb), BlankColored(p6));
        }
        for x in [Pair(p3, p6), Pair(p7, p8), Pair(p8, p7)] {
            add(6, Bits(p2, p3, bb, false), x, Bits(p2, p3, bb, true), BlankColored(p9));
        }
    }

    for bb in bits {
        for other in bits {
            add(7, Bits(p2, p3, false, bb), Bits(p5, p6, other, false), Bits(p2, p3, true, bb), Bits(p5, p6, other, true));
            add(7, Bits(p2, p3, false, bb), Bits(p4, p6, false, other), Bits(p2, p3, true, bb), Bits(p4, p6, true, other));
            add(7, Bits(p2, p3, bb, false), Bits(p8, p9, false, other), Bits(p2, p3, bb, true), Bits(p8, p9, true, other));
            add(7, Bits(p2, p3, bb, false), Bits(p7, p9, other, false), Bits(p2, p3, bb, true), Bits(p7, p9, other, true));
        }
    }

    let north_skip = |x: &Colored<S>| matches!(x, Bits(i, _, _, false) if *i == p5) || matches!(x, Bits(i, _, false, _) if *i == p4);
    let south_skip = |x: &Colored<S>| matches!(x, Bits(i, _, false, _) if *i == p8) || matches!(x, Bits(i, _, _, false) if *i == p7);
    for bb in bits {
        for x in colored_of(p6, nonblank) {
            if !north_skip(&x) {
                add(8, Bits(p2, p3, false, bb), x.clone(), Bits(p2, p3, true, bb), x);
            }
        }
        for x in colored_of(p9, nonblank) {
            if !south_skip(&x) {
                add(8, Bits(p2, p3, bb, false), x.clone(), Bits(p2, p3, bb, true), x);
            }
        }
    }

    add(9, SubP(p1, p2), Bits(p2, p3, true, true), Chi(p2), BlankColored(p3));
    add(10, BlankColored(p3), Pair(p2, p3), BlankColored(p3), Blank);

    let (cb, cc) = match mutation {
        OrientMutation::None => (sp(b, p1), sp(c, p2)),
        OrientMutation::SwapFinalProducts => (sp(c, p1), sp(b, p2)),
    };
    add(11, sp(a, p1), Chi(p2), cb, cc);
}

/// A source bimolecular reaction read as (first, second, products, global direction),
/// undoing the load-time normalization of S and W rules.
fn oriented<S: Species>(r: &Reaction<S>, blank: &S) -> Option<(S, S, S, S, u8)> {
    match r {
        Reaction::Bi { a, b, c, d, orient: Orient::Directed(k) } => {
            if a == blank && b != blank {
                Some((b.clone(), a.clone(), d.clone(), c.clone(), (k + 2) % 4))
            } else {
                Some((a.clone(), b.clone(), c.clone(), d.clone(), *k))
            }
        }
        _ => None,
    }
}

fn is_growing<S: Species>(r: &(S, S, S, S, u8), blank: &S) -> bool {
    &r.1 == blank && &r.0 != blank && &r.2 != blank && &r.3 != blank
}

/// The growing-reaction family over all permutations for the rule's direction.
pub fn emit_growing<S: Species>(
    r: &Reaction<S>,
    blank: &S,
    nonblank: &[S],
    mutation: OrientMutation,
    out: &mut RuleSet<Colored<S>>,
) -> Result<(), OrientError> {
    let g = oriented(r, blank).filter(|g| is_growing(g, blank)).ok_or_else(|| OrientError::NotGrowing(r.to_string()))?;
    for (label, pi) in family(rotation_for(g.4)) {
        emit_growing_for(&g.0, &g.2, &g.3, &pi, &label, nonblank, mutation, out);
    }
    Ok(())
}

/// Transitions between cells whose blocks are already colored.
pub fn emit_transition<S: Species>(r: &Reaction<S>, blank: &S, out: &mut RuleSet<Colored<S>>) {
    match r {
        Reaction::Uni { a, b } => {
            for i in 1..=9 {
                out.push(Reaction::Uni { a: paint(a, i, blank), b: paint(b, i, blank) }, &Provenance::new(TRANSITIONS, 1, format!("color {i}")));
            }
        }
        Reaction::Bi { .. } => {
            let Some((a, b, c, d, dir)) = oriented(r, blank) else { return };
            for (label, pi) in family(rotation_for(dir)) {
                let (i, j) = (pi.apply(1), pi.apply(2));
                out.push(
                    Reaction::Bi { a: paint(&a, i, blank), b: paint(&b, j, blank), c: paint(&c, i, blank), d: paint(&d, j, blank), orient: Orient::Undirected },
                    &Provenance::new(TRANSITIONS, 1, label),
                );
            }
        }
    }
}

/// Non-blank source species in a stable order.
pub fn nonblank_species<S: Species>(sys: &ScrnSystem<S>) -> Vec<S> {
    let mut set: BTreeSet<S> = sys.species.iter().cloned().collect();
    for (_, s) in sys.initial.iter() {
        set.insert(s.clone());
    }
    if let Some(t) = sys.table() {
        for r in t.rules() {
            match r {
                Reaction::Uni { a, b } => set.extend([a.clone(), b.clone()]),
                Reaction::Bi { a, b, c, d, .. } => set.extend([a.clone(), b.clone(), c.clone(), d.clone()]),
            }
        }
    }
    set.remove(&sys.blank);
    set.into_iter().collect()
}

/// The image of a compiled state.
pub fn represent<S: Species>(x: &Colored<S>, seed: &S, blank: &S) -> S {
    match x {
        Colored::Species(s, _) | Colored::Raw(s) => s.clone(),
        Colored::Boot(Boot::Zero) => seed.clone(),
        _ => blank.clone(),
    }
}

pub type OrientCompiled<S> = Compiled<ScrnSystem<Colored<S>>, Colored<S>, S>;

pub fn compile<S: Species>(src: &ScrnSystem<S>) -> Result<OrientCompiled<S>, OrientError> {
    compile_with(src, OrientMutation::None)
}

pub fn compile_with<S: Species>(src: &ScrnSystem<S>, mutation: OrientMutation) -> Result<OrientCompiled<S>, OrientError> {
    if src.flavor != Flavor::Directed {
        return Err(OrientError::NotDirected);
    }
    if !src.unit_seeded || src.initial.len() != 1 {
        return Err(OrientError::NotUnitSeeded);
    }
    let table = src.table().ok_or(OrientError::Generated)?;
    let (at, seed) = src.initial.iter().next().map(|(c, s)| (c, s.clone())).expect("unit seed");
    let blank = src.blank.clone();
    let nonblank = nonblank_species(src);
    let mut rules = RuleSet::new();
    emit_bootstrap(&seed, &mut rules);
    for r in table.rules() {
        match oriented(r, &blank) {
            Some(g) if is_growing(&g, &blank) => emit_growing(r, &blank, &nonblank, mutation, &mut rules)?,
            _ => emit_transition(r, &blank, &mut rules),
        }
    }
    let initial = Configuration::from_cells(Colored::Blank, LatticeKind::Square4, [(at, Colored::Raw(seed.clone()))]);
    let states = state_set(&seed, &nonblank);
    let RuleSet { rules: list, provenance, .. } = rules;
    let system = ScrnSystem::new(Flavor::Plain, Colored::Blank, states, initial, true, list)?;
    let represent = Arc::new(move |x: &Colored<S>| Some(represent(x, &seed, &blank)));
    Ok(Compiled { system, represent, provenance })
}

/// The full compiled state set.
pub fn state_set<S: Species>(seed: &S, nonblank: &[S]) -> Vec<Colored<S>> {
    use Boot::*;
    let mut v = vec![Colored::Blank, Colored::Raw(seed.clone())];
    v.extend([Zero, One, X, Y, Z, Two, Three, Four, Five].map(Colored::Boot));
    for j in 1..=9 {
        v.extend(colored_of(j, nonblank));
        for i in 1..=9 {
            v.push(Colored::Pair(i, j));
        }
    }
    v
}

/// The seed block as the bootstrap leaves it, in the reference orientation.
pub fn post_bootstrap<S: Species>(seed: &S, at: Coord) -> Configuration<Colored<S>> {
    let mut cfg = Configuration::empty(Colored::Blank, LatticeKind::Square4);
    for c in block(at) {
        cfg.set(c, Colored::BlankColored(reference_color(c.offset((1 - at.x, 1 - at.y)))));
    }
    cfg.set(at, Colored::Species(seed.clone(), 5));
    cfg
}

fn is_colored<S>(x: &Colored<S>) -> bool {
    x.color().is_some()
}

/// Every colored source species has its whole block colored.
pub fn check_complete_coloring<S: Species>(cfg: &Configuration<Colored<S>>) -> bool {
    cfg.iter()
        .filter(|(_, s)| matches!(s, Colored::Species(..)))
        .all(|(c, _)| block(c).into_iter().all(|b| is_colored(cfg.get(b))))
}

/// Colors agree with one global 3x3 tiling up to a lattice symmetry.
pub fn check_color_consistency<S: Species>(cfg: &Configuration<Colored<S>>) -> bool {
    let colored: Vec<(Coord, u8)> = cfg.iter().filter_map(|(c, s)| s.color().map(|j| (c, j))).collect();
    if colored.is_empty() {
        return true;
    }
    LatticeKind::Square4.symmetries().iter().any(|g| {
        (0..3).any(|tx| {
            (0..3).any(|ty| colored.iter().all(|(c, j)| reference_color(g.apply(*c).offset((tx, ty))) == *j))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Region;
    use crate::model::{explore, explore_from, Limits};
    use crate::scrn::{bi, nm, Name};
    use crate::verify::{check_equiv, check_follows, check_models, Setup};

    fn toy(rules: Vec<Reaction<Name>>) -> ScrnSystem<Name> {
        let init = Configuration::from_cells(nm("O"), LatticeKind::Square4, [(Coord::ORIGIN, nm("s"))]);
        ScrnSystem::new(Flavor::Directed, nm("O"), vec![], init, true, rules).unwrap()
    }

    fn compose_oracle(outer: &[u8; 9], inner: &[u8; 9]) -> [u8; 9] {
        let mut r = [0; 9];
        for i in 0..9 {
            r[i] = outer[inner[i] as usize - 1];
        }
        r
    }

    #[test]
    fn permutation_tables() {
        let p2 = Perm::ROT[1];
        assert_eq!((p2.apply(1), p2.apply(2), p2.apply(9)), (3, 6, 7));
        assert_eq!(Perm::ROT[0], Perm::ID);
        let ur = Perm::UP.after(&Perm::RIGHT);
        assert_eq!(ur.0, compose_oracle(&Perm::UP.0, &Perm::RIGHT.0));
        assert_eq!(ur.0, [5, 6, 4, 8, 9, 7, 2, 3, 1]);
        for k in 1..=4 {
            let fam = family(k);
            assert_eq!(fam.len(), 9);
            let starts: BTreeSet<u8> = fam.iter().map(|(_, p)| p.apply(1)).collect();
            assert_eq!(starts.len(), 9);
            assert!(fam.iter().all(|(_, p)| p.is_bijection()));
        }
    }

    #[test]
    fn permutations_move_colors_along_the_tiling() {
        // color pi(1) -> pi(2) is one step in the rule's direction for every pi in the family
        for (dir, k) in [(1u8, 1usize), (0, 2), (3, 3), (2, 4)] {
            for (_, pi) in family(k) {
                let from = (0..9).map(|i| Coord::new(i % 3, i / 3)).find(|c| reference_color(*c) == pi.apply(1)).unwrap();
                let to = LatticeKind::Square4.step(from, dir);
                assert_eq!(reference_color(to), pi.apply(2));
                let beyond = LatticeKind::Square4.step(to, dir);
                assert_eq!(reference_color(beyond), pi.apply(3));
            }
        }
    }

    #[test]
    fn bootstrap_is_fixed() {
        let mut rs = RuleSet::new();
        emit_bootstrap(&nm("s"), &mut rs);
        assert_eq!(rs.len(), 1 + 3 + 3 + 7 + 3);
        let text: Vec<String> = rs.rules.iter().map(|r| r.to_string()).collect();
        assert!(text.contains(&"O^4 + @0 -> O^4 + s^5".to_string()));
        for r in ["O^8 + @Y -> O^8 + O", "O^6 + @Z -> O^6 + O", "O^4 + @Z -> O^4 + O"] {
            assert!(text.contains(&r.to_string()), "{r}");
        }
    }

    #[test]
    fn growing_family_matches_hand_count() {
        let nonblank = vec![nm("A")];
        let mut rs = RuleSet::new();
        emit_growing_for(&nm("A"), &nm("A"), &nm("A"), &Perm::ID, "id", &nonblank, OrientMutation::None, &mut rs);
        let n = nonblank.len();
        let xi = n + 2 + 9 + 9 + 36;
        // item 5's two blank-observation lines coincide on the 00 observer
        let hand = 1 + (n + 1) + 4 + 1 + (3 + 2 * xi) + 2 * 2 * 3 + 16 + 2 * 2 * (xi - 4) + 1 + 1 + 1;
        assert_eq!(rs.len(), hand);
        let text: Vec<String> = rs.rules.iter().map(|r| r.to_string()).collect();
        assert!(text.contains(&"A^1 + O^2 -> A^1 + chi[1->2]".to_string()));
        assert!(text.contains(&"A^1 + chi^2 -> A^1 + A^2".to_string()));
        assert!(text.contains(&"chi[1->2] + chi[6->3] -> chi[1->2]p + chi[2->3]00".to_string()));
        assert!(text.contains(&"chi[1->2] + chi[9->3] -> chi[1->2]p + chi[2->3]00".to_string()));
    }

    #[test]
    fn transitions_cover_each_color() {
        let mut rs = RuleSet::new();
        emit_transition(&Reaction::Uni { a: nm("A"), b: nm("B") }, &nm("O"), &mut rs);
        assert_eq!(rs.len(), 9);
        let mut rs = RuleSet::new();
        emit_transition(&bi("A", "B", "C", "D", Orient::Directed(1)), &nm("O"), &mut rs);
        assert_eq!(rs.len(), 9);
    }

    #[test]
    fn representation() {
        let src = toy(vec![bi("s", "O", "s", "A", Orient::Directed(1))]);
        let comp = compile(&src).unwrap();
        assert_eq!(comp.image(&Colored::SubP(1, 2)), Some(nm("O")));
        assert_eq!(comp.image(&Colored::Species(nm("B"), 7)), Some(nm("B")));
        assert_eq!(comp.image(&Colored::Boot(Boot::Zero)), Some(nm("s")));
        assert!(comp.system.unit_seeded);
    }

    #[test]
    fn complete_coloring_checker() {
        let mut cfg = Configuration::empty(Colored::Blank, LatticeKind::Square4);
        for c in block(Coord::ORIGIN) {
            cfg.set(c, Colored::BlankColored(reference_color(c.offset((1, 1)))));
        }
        cfg.set(Coord::ORIGIN, Colored::Species(nm("s"), 5));
        assert!(check_complete_coloring(&cfg));
        assert!(check_color_consistency(&cfg));
        cfg.set(Coord::new(1, 1), Colored::Blank);
        assert!(!check_complete_coloring(&cfg));
        cfg.set(Coord::new(1, 1), Colored::BlankColored(1));
        assert!(!check_color_consistency(&cfg));
    }

    fn project(comp: &OrientCompiled<Name>) -> impl Fn(&Configuration<Colored<Name>>) -> Option<Configuration<Name>> + Sync + '_ {
        move |c| c.try_map(nm("O"), |x| comp.image(x))
    }

    #[test]
    fn growth_from_colored_seed_refines_source() {
        let src = toy(vec![bi("s", "O", "s", "A", Orient::Directed(1)), crate::scrn::uni("A", "B")]);
        let comp = compile(&src).unwrap();
        let start = post_bootstrap(&nm("s"), Coord::ORIGIN);
        let proj = project(&comp);
        let setup = Setup::new(&comp.system, &src, &proj, Region::new(3), 40).starting_at(start.clone(), None);
        let f = check_follows(&setup);
        assert!(f.verdict.is_pass(), "{f}");
        let m = check_models(&setup);
        assert!(m.verdict.is_pass(), "{m}");
        let e = check_equiv(&setup, None);
        assert!(e.verdict.is_pass(), "{e}");
        // growth happened and every reachable configuration keeps its blocks colored
        let g = explore_from(&comp.system, start, &Region::new(3), Limits::depth(40));
        assert!(g.exact());
        assert!(g.states.iter().any(|c| c.get(Coord::new(1, 0)) == &Colored::Species(nm("B"), 6)));
        assert!(g.states.iter().all(check_complete_coloring));
        assert!(g.states.iter().all(check_color_consistency));
    }

    #[test]
    fn swapped_final_products_are_caught() {
        let src = toy(vec![bi("s", "O", "s", "A", Orient::Directed(1))]);
        let comp = compile_with(&src, OrientMutation::SwapFinalProducts).unwrap();
        let proj = project(&comp);
        let setup = Setup::new(&comp.system, &src, &proj, Region::new(3), 40).starting_at(post_bootstrap(&nm("s"), Coord::ORIGIN), None);
        assert!(check_follows(&setup).verdict.is_fail());
    }

    #[test]
    fn bootstrap_reaches_colored_seed_block() {
        let src = toy(vec![]);
        let comp = compile(&src).unwrap();
        let g = explore(&comp.system, &Region::new(3), Limits::new(19, 2_000_000));
        let hit = g.states.iter().position(|c| {
            c.get(Coord::ORIGIN) == &Colored::Species(nm("s"), 5)
                && block(Coord::ORIGIN).into_iter().all(|b| c.get(b).color().is_some())
        });
        let i = hit.expect("seed block colored within 19 steps");
        assert_eq!(g.depth[i], 19);
        assert!(check_color_consistency(&g.states[i]));
    }
}
