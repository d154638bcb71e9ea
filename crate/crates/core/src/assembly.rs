//! Seeded tile assembly at temperature tau and unit-seeded tile automata.

use crate::config::Configuration;
use crate::lattice::{Coord, LatticeKind, Region, E, N, S};
use crate::model::Model;
use crate::scrn::Name;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

pub const NULL: &str = "null";

pub fn null() -> Name {
    Name::new(NULL)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("position {0} is already occupied")]
    Occupied(Coord),
    #[error("temperature must be at least 1")]
    ZeroTemperature,
    #[error("unknown tile or state {0}")]
    Unknown(String),
    #[error("the name null is reserved for the empty tile")]
    ReservedName,
    #[error("rule {rule} lowers affinity: {witness}")]
    NotStrengthening { rule: usize, witness: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub name: Name,
    /// Glue labels in N, E, S, W order.
    pub glues: [Name; 4],
}

impl Tile {
    pub fn new(name: &str, glues: [&str; 4]) -> Self {
        Tile { name: Name::new(name), glues: glues.map(Name::new) }
    }
}

#[derive(Clone, Debug)]
pub struct AtamSystem {
    pub tiles: Vec<Tile>,
    pub seed: usize,
    pub strength: BTreeMap<Name, u32>,
    pub tau: u32,
    by_name: HashMap<Name, usize>,
}

impl AtamSystem {
    pub fn new(tiles: Vec<Tile>, seed: &str, strength: BTreeMap<Name, u32>, tau: u32) -> Result<Self, AssemblyError> {
        if tau == 0 {
            return Err(AssemblyError::ZeroTemperature);
        }
        if tiles.iter().any(|t| t.name.as_str() == NULL) {
            return Err(AssemblyError::ReservedName);
        }
        let by_name: HashMap<Name, usize> = tiles.iter().enumerate().map(|(i, t)| (t.name.clone(), i)).collect();
        let seed = *by_name.get(&Name::new(seed)).ok_or_else(|| AssemblyError::Unknown(seed.to_string()))?;
        Ok(AtamSystem { tiles, seed, strength, tau, by_name })
    }

    /// g(x, y): the label strength when both labels agree, else zero.
    pub fn glue(&self, x: &Name, y: &Name) -> u32 {
        if x == y && x.as_str() != NULL {
            self.strength.get(x).copied().unwrap_or(0)
        } else {
            0
        }
    }

    pub fn tile(&self, name: &Name) -> Option<&Tile> {
        self.by_name.get(name).map(|&i| &self.tiles[i])
    }

    pub fn seed_assembly(&self) -> Configuration<Name> {
        Configuration::empty(null(), LatticeKind::Square4).with(Coord::ORIGIN, self.tiles[self.seed].name.clone())
    }

    /// Glue facing `pos` from its neighbor in direction d, or null.
    pub fn facing(&self, asm: &Configuration<Name>, pos: Coord, d: u8) -> Name {
        let v = LatticeKind::Square4.step(pos, d);
        match self.tile(asm.get(v)) {
            Some(t) => t.glues[LatticeKind::Square4.opposite(d) as usize].clone(),
            None => null(),
        }
    }

    pub fn binding_strength(&self, asm: &Configuration<Name>, pos: Coord, t: &Tile) -> u32 {
        (0..4u8).map(|d| self.glue(&t.glues[d as usize], &self.facing(asm, pos, d))).sum()
    }

    pub fn attachable(&self, asm: &Configuration<Name>, pos: Coord, t: &Tile) -> Result<bool, AssemblyError> {
        if !asm.is_blank(pos) {
            return Err(AssemblyError::Occupied(pos));
        }
        Ok(self.binding_strength(asm, pos, t) >= self.tau)
    }

    /// Every attachable (position, tile index) pair inside `rg`.
    pub fn steps(&self, asm: &Configuration<Name>, rg: &Region) -> Vec<(Coord, usize)> {
        let mut out = Vec::new();
        for pos in frontier(asm, rg) {
            for (i, t) in self.tiles.iter().enumerate() {
                if self.binding_strength(asm, pos, t) >= self.tau {
                    out.push((pos, i));
                }
            }
        }
        out
    }

    /// Min-cut check by enumerating bipartitions; `None` above 12 tiles.
    pub fn is_stable(&self, asm: &Configuration<Name>) -> Option<bool> {
        stable_by_cuts(asm, self.tau, |a, b, d| {
            let (ta, tb) = (self.tile(a)?, self.tile(b)?);
            Some(self.glue(&ta.glues[d as usize], &tb.glues[LatticeKind::Square4.opposite(d) as usize]))
        })
    }
}

/// Empty cells inside `rg` adjacent to the support, in coordinate order.
fn frontier<T: Clone + Eq>(asm: &Configuration<T>, rg: &Region) -> Vec<Coord> {
    let mut set = BTreeSet::new();
    for c in asm.support() {
        for n in LatticeKind::Square4.neighbors(c) {
            if rg.contains(n) && asm.is_blank(n) {
                set.insert(n);
            }
        }
    }
    set.into_iter().collect()
}

fn stable_by_cuts(
    asm: &Configuration<Name>,
    tau: u32,
    weight: impl Fn(&Name, &Name, u8) -> Option<u32>,
) -> Option<bool> {
    let cells: Vec<(Coord, Name)> = asm.iter().map(|(c, s)| (c, s.clone())).collect();
    let n = cells.len();
    if n > 12 {
        return None;
    }
    if n < 2 {
        return Some(true);
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(d) = LatticeKind::Square4.dir_between(cells[i].0, cells[j].0) {
                if d == N || d == E {
                    edges.push((i, j, weight(&cells[i].1, &cells[j].1, d).unwrap_or(0)));
                }
            }
        }
    }
    for mask in 1u32..(1 << (n - 1)) {
        let side = |k: usize| mask >> k & 1 == 1;
        let cut: u32 = edges.iter().filter(|(i, j, _)| side(*i) != side(*j)).map(|(_, _, w)| w).sum();
        if cut < tau {
            return Some(false);
        }
    }
    Some(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttachEvent {
    pub pos: Coord,
    pub tile: usize,
}

impl fmt::Display for AttachEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule={} at={} dir=-", self.tile, self.pos)
    }
}

impl Model for AtamSystem {
    type Config = Configuration<Name>;
    type Event = AttachEvent;

    fn initial(&self) -> Configuration<Name> {
        self.seed_assembly()
    }

    fn successors(&self, cfg: &Configuration<Name>, rg: &Region) -> Vec<(AttachEvent, Configuration<Name>)> {
        self.steps(cfg, rg)
            .into_iter()
            .map(|(pos, tile)| (AttachEvent { pos, tile }, cfg.clone().with(pos, self.tiles[tile].name.clone())))
            .collect()
    }

    fn touches_boundary(&self, cfg: &Configuration<Name>, rg: &Region) -> bool {
        cfg.touches_boundary(rg)
    }
}

/// Relative orientation of a tile-automata pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaOrient {
    /// First operand directly above the second.
    Vertical,
    /// First operand directly left of the second.
    Horizontal,
}

impl TaOrient {
    pub fn symbol(self) -> &'static str {
        match self {
            TaOrient::Vertical => "v",
            TaOrient::Horizontal => "h",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaRule {
    pub x1: Name,
    pub y1: Name,
    pub x2: Name,
    pub y2: Name,
    pub orient: TaOrient,
}

impl TaRule {
    pub fn new(x1: &str, y1: &str, x2: &str, y2: &str, orient: TaOrient) -> Self {
        TaRule { x1: Name::new(x1), y1: Name::new(y1), x2: Name::new(x2), y2: Name::new(y2), orient }
    }
}

#[derive(Clone, Debug)]
pub struct TaSystem {
    pub states: Vec<Name>,
    pub attachable: Vec<Name>,
    pub affinity: BTreeMap<(Name, Name, TaOrient), u32>,
    pub rules: Vec<TaRule>,
    pub seed: Name,
    pub tau: u32,
    /// Affinity returned for pairs absent from the table.
    pub default_affinity: u32,
    pair_rules: HashMap<(Name, Name, TaOrient), Vec<usize>>,
}

impl TaSystem {
    pub fn new(
        states: Vec<Name>,
        attachable: Vec<Name>,
        affinity: BTreeMap<(Name, Name, TaOrient), u32>,
        rules: Vec<TaRule>,
        seed: &str,
        tau: u32,
    ) -> Result<Self, AssemblyError> {
        if tau == 0 {
            return Err(AssemblyError::ZeroTemperature);
        }
        if states.iter().any(|s| s.as_str() == NULL) {
            return Err(AssemblyError::ReservedName);
        }
        let known: BTreeSet<&Name> = states.iter().collect();
        let seed = Name::new(seed);
        for s in attachable.iter().chain([&seed]) {
            if !known.contains(s) {
                return Err(AssemblyError::Unknown(s.to_string()));
            }
        }
        for r in &rules {
            for s in [&r.x1, &r.y1, &r.x2, &r.y2] {
                if !known.contains(s) {
                    return Err(AssemblyError::Unknown(s.to_string()));
                }
            }
        }
        let mut pair_rules: HashMap<(Name, Name, TaOrient), Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            pair_rules.entry((r.x1.clone(), r.y1.clone(), r.orient)).or_default().push(i);
        }
        Ok(TaSystem { states, attachable, affinity, rules, seed, tau, default_affinity: 0, pair_rules })
    }

    pub fn with_default_affinity(mut self, g: u32) -> Self {
        self.default_affinity = g;
        self
    }

    pub fn g(&self, a: &Name, b: &Name, o: TaOrient) -> u32 {
        if a.as_str() == NULL || b.as_str() == NULL {
            return 0;
        }
        self.affinity.get(&(a.clone(), b.clone(), o)).copied().unwrap_or(self.default_affinity)
    }

    /// Affinity between a tile in state `s` at `pos` and its neighbor in direction d.
    pub fn affinity_towards(&self, s: &Name, other: &Name, d: u8) -> u32 {
        match d {
            N => self.g(other, s, TaOrient::Vertical),
            E => self.g(s, other, TaOrient::Horizontal),
            S => self.g(s, other, TaOrient::Vertical),
            _ => self.g(other, s, TaOrient::Horizontal),
        }
    }

    pub fn binding_strength(&self, asm: &Configuration<Name>, pos: Coord, s: &Name) -> u32 {
        (0..4u8)
            .map(|d| self.affinity_towards(s, asm.get(LatticeKind::Square4.step(pos, d)), d))
            .sum()
    }

    pub fn attachable_at(&self, asm: &Configuration<Name>, pos: Coord, s: &Name) -> Result<bool, AssemblyError> {
        if !asm.is_blank(pos) {
            return Err(AssemblyError::Occupied(pos));
        }
        Ok(self.binding_strength(asm, pos, s) >= self.tau)
    }

    pub fn seed_assembly(&self) -> Configuration<Name> {
        Configuration::empty(null(), LatticeKind::Square4).with(Coord::ORIGIN, self.seed.clone())
    }

    /// First violation of monotone affinity, if any.
    pub fn check_affinity_strengthening(&self) -> Result<(), AssemblyError> {
        for (i, r) in self.rules.iter().enumerate() {
            for (before, after) in [(&r.x1, &r.x2), (&r.y1, &r.y2)] {
                for other in &self.states {
                    for o in [TaOrient::Vertical, TaOrient::Horizontal] {
                        if self.g(before, other, o) > self.g(after, other, o) {
                            return Err(AssemblyError::NotStrengthening {
                                rule: i,
                                witness: format!("g({before},{other},{}) > g({after},{other},{})", o.symbol(), o.symbol()),
                            });
                        }
                        if self.g(other, before, o) > self.g(other, after, o) {
                            return Err(AssemblyError::NotStrengthening {
                                rule: i,
                                witness: format!("g({other},{before},{}) > g({other},{after},{})", o.symbol(), o.symbol()),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn steps(&self, asm: &Configuration<Name>, rg: &Region) -> Vec<(TaEvent, Configuration<Name>)> {
        let mut out = Vec::new();
        for pos in frontier(asm, rg) {
            for (k, s) in self.attachable.iter().enumerate() {
                if self.binding_strength(asm, pos, s) >= self.tau {
                    out.push((TaEvent::Attach { pos, state: k }, asm.clone().with(pos, s.clone())));
                }
            }
        }
        for (u, x) in asm.iter() {
            for (d, o) in [(E, TaOrient::Horizontal), (S, TaOrient::Vertical)] {
                let v = LatticeKind::Square4.step(u, d);
                if asm.is_blank(v) {
                    continue;
                }
                let key = (x.clone(), asm.get(v).clone(), o);
                for &i in self.pair_rules.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                    let r = &self.rules[i];
                    let next = asm.clone().with(u, r.x2.clone()).with(v, r.y2.clone());
                    out.push((TaEvent::Rule { rule: i, first: u, second: v }, next));
                }
            }
        }
        out
    }

    pub fn is_stable(&self, asm: &Configuration<Name>) -> Option<bool> {
        stable_by_cuts(asm, self.tau, |a, b, d| Some(self.affinity_towards(a, b, d)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaEvent {
    Attach { pos: Coord, state: usize },
    Rule { rule: usize, first: Coord, second: Coord },
}

impl fmt::Display for TaEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaEvent::Attach { pos, state } => write!(f, "attach={state} at={pos} dir=-"),
            TaEvent::Rule { rule, first, second } => {
                let d = if first.y != second.y { "v" } else { "h" };
                write!(f, "rule={rule} at={first},{second} dir={d}")
            }
        }
    }
}

impl Model for TaSystem {
    type Config = Configuration<Name>;
    type Event = TaEvent;

    fn initial(&self) -> Configuration<Name> {
        self.seed_assembly()
    }

    fn successors(&self, cfg: &Configuration<Name>, rg: &Region) -> Vec<(TaEvent, Configuration<Name>)> {
        self.steps(cfg, rg)
    }

    fn touches_boundary(&self, cfg: &Configuration<Name>, rg: &Region) -> bool {
        cfg.touches_boundary(rg)
    }
}

/// Three-tile toy: a seed with glue a on top, a tile binding it from above
/// that offers glue b to the west, and a tile binding that from the west.
pub fn corner_toy() -> AtamSystem {
    let tiles = vec![
        Tile::new("seed", ["a", NULL, NULL, NULL]),
        Tile::new("hat", [NULL, NULL, "a", "b"]),
        Tile::new("arm", [NULL, "b", NULL, NULL]),
    ];
    let strength = BTreeMap::from([(Name::new("a"), 1), (Name::new("b"), 1)]);
    AtamSystem::new(tiles, "seed", strength, 1).expect("toy is well formed")
}

/// Ladder s0 -> s1 -> ... where every state binds with strength equal to its index.
pub fn ladder_ta(levels: usize, monotone: bool) -> TaSystem {
    let states: Vec<Name> = (0..levels).map(|k| Name::new(&format!("s{k}"))).collect();
    let mut affinity = BTreeMap::new();
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            for o in [TaOrient::Vertical, TaOrient::Horizontal] {
                affinity.insert((a.clone(), b.clone(), o), (i.min(j)) as u32);
            }
        }
    }
    let mut rules = Vec::new();
    for k in 0..levels.saturating_sub(1) {
        let (lo, hi) = (states[k].as_str(), states[k + 1].as_str());
        if monotone {
            rules.push(TaRule::new(lo, lo, hi, lo, TaOrient::Horizontal));
        } else {
            rules.push(TaRule::new(hi, hi, lo, hi, TaOrient::Horizontal));
        }
    }
    let seed = states[0].as_str().to_string();
    TaSystem::new(states.clone(), vec![], affinity, rules, &seed, 1).expect("ladder is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{explore, Limits};

    #[test]
    fn corner_toy_attaches_by_single_matches() {
        let sys = corner_toy();
        let asm = sys.seed_assembly();
        let hat = sys.tiles[1].clone();
        assert!(sys.attachable(&asm, Coord::new(0, 1), &hat).unwrap());
        assert_eq!(sys.attachable(&asm, Coord::ORIGIN, &hat), Err(AssemblyError::Occupied(Coord::ORIGIN)));
        let g = explore(&sys, &Region::new(3), Limits::depth(10));
        assert!(g.exact());
        let terms = g.terminals();
        assert_eq!(terms.len(), 1);
        let t = &g.states[terms[0]];
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(Coord::new(-1, 1)), &Name::new("arm"));
    }

    #[test]
    fn null_glues_never_bind() {
        let sys = corner_toy();
        let blank = Tile::new("x", [NULL; 4]);
        assert!(!sys.attachable(&sys.seed_assembly(), Coord::new(0, 1), &blank).unwrap());
    }

    #[test]
    fn temperature_two_needs_cooperation() {
        let tiles = vec![
            Tile::new("s", ["a", "b", NULL, NULL]),
            Tile::new("n", [NULL, "c", "a", NULL]),
            Tile::new("e", ["d", NULL, NULL, "b"]),
            Tile::new("corner", [NULL, NULL, "d", "c"]),
        ];
        let strength = BTreeMap::from([("a", 2), ("b", 2), ("c", 1), ("d", 1)].map(|(k, v)| (Name::new(k), v)));
        let sys = AtamSystem::new(tiles, "s", strength, 2).unwrap();
        let corner = sys.tiles[3].clone();
        let one_side = sys.seed_assembly().with(Coord::new(0, 1), Name::new("n"));
        assert!(!sys.attachable(&one_side, Coord::new(1, 1), &corner).unwrap());
        let both = one_side.with(Coord::new(1, 0), Name::new("e"));
        assert!(sys.attachable(&both, Coord::new(1, 1), &corner).unwrap());
        assert_eq!(sys.is_stable(&both), Some(true));
    }

    #[test]
    fn step_counts_on_small_frontiers() {
        let sys = AtamSystem::new(
            vec![Tile::new("s", [NULL, "a", NULL, NULL]), Tile::new("t", [NULL, NULL, NULL, "a"])],
            "s",
            BTreeMap::from([(Name::new("a"), 1)]),
            1,
        )
        .unwrap();
        assert_eq!(sys.steps(&sys.seed_assembly(), &Region::new(2)), vec![(Coord::new(1, 0), 1)]);
        let two = AtamSystem::new(
            vec![Tile::new("s", [NULL, "a", NULL, "a"]), Tile::new("t", [NULL, "a", NULL, "a"])],
            "s",
            BTreeMap::from([(Name::new("a"), 1)]),
            1,
        )
        .unwrap();
        assert_eq!(two.steps(&two.seed_assembly(), &Region::new(2)).len(), 4);
        let none = AtamSystem::new(vec![Tile::new("s", [NULL; 4])], "s", BTreeMap::new(), 1).unwrap();
        assert!(none.steps(&none.seed_assembly(), &Region::new(2)).is_empty());
    }

    #[test]
    fn ladder_gate() {
        assert!(ladder_ta(4, true).check_affinity_strengthening().is_ok());
        let err = ladder_ta(4, false).check_affinity_strengthening().unwrap_err();
        assert!(matches!(err, AssemblyError::NotStrengthening { rule: 0, .. }));
        let ident = TaSystem::new(
            vec![Name::new("a")],
            vec![],
            BTreeMap::new(),
            vec![TaRule::new("a", "a", "a", "a", TaOrient::Vertical)],
            "a",
            1,
        )
        .unwrap();
        assert!(ident.check_affinity_strengthening().is_ok());
    }

    #[test]
    fn ta_orientation_semantics() {
        let sys = TaSystem::new(
            ["a", "b", "c", "d"].map(Name::new).to_vec(),
            vec![],
            BTreeMap::new(),
            vec![TaRule::new("a", "b", "c", "d", TaOrient::Vertical), TaRule::new("a", "b", "d", "c", TaOrient::Vertical)],
            "a",
            1,
        )
        .unwrap();
        let above = sys.seed_assembly().with(Coord::new(0, -1), Name::new("b"));
        let steps = sys.steps(&above, &Region::new(2));
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].1.get(Coord::ORIGIN), &Name::new("c"));
        assert_eq!(steps[1].1.get(Coord::ORIGIN), &Name::new("d"));
        let below = sys.seed_assembly().with(Coord::new(0, 1), Name::new("b"));
        assert!(sys.steps(&below, &Region::new(2)).is_empty());
    }

    #[test]
    fn ta_attach_then_transition() {
        let mut aff = BTreeMap::new();
        aff.insert((Name::new("s"), Name::new("x"), TaOrient::Horizontal), 1);
        aff.insert((Name::new("t"), Name::new("x"), TaOrient::Horizontal), 1);
        aff.insert((Name::new("t"), Name::new("y"), TaOrient::Horizontal), 1);
        aff.insert((Name::new("s"), Name::new("y"), TaOrient::Horizontal), 1);
        let sys = TaSystem::new(
            ["s", "x", "t", "y"].map(Name::new).to_vec(),
            vec![Name::new("x")],
            aff,
            vec![TaRule::new("s", "x", "t", "y", TaOrient::Horizontal)],
            "s",
            1,
        )
        .unwrap();
        assert!(sys.check_affinity_strengthening().is_ok());
        let g = explore(&sys, &Region::new(2), Limits::depth(5));
        assert!(g.exact());
        assert_eq!(g.len(), 3);
        let t = g.terminals();
        assert_eq!(g.path_to(t[0]).len(), 2);
    }
}
