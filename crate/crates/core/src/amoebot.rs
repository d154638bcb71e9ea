//! Amoebot particle systems on the triangular lattice.

use crate::lattice::{Coord, LatticeKind, Region};
use crate::model::{Model, StepError};
use crate::scrn::Species;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

const TRI: LatticeKind = LatticeKind::Triangular6;

pub type Flags<F> = [Option<F>; 10];

pub fn no_flags<F>() -> Flags<F> {
    std::array::from_fn(|_| None)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmoebotError {
    #[error("expand target {0} is occupied")]
    TargetOccupied(Coord),
    #[error("contracted particles cannot contract")]
    AlreadyContracted,
    #[error("expanded particles cannot expand")]
    AlreadyExpanded,
    #[error("handover partner at {0} is missing or has the wrong shape")]
    NoPartner(Coord),
    #[error("direction {0} is out of range for this particle")]
    BadLabel(u8),
    #[error("particles overlap at {0}")]
    Overlap(Coord),
    #[error("no particle occupies {0}")]
    NoParticle(Coord),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Movement {
    Idle,
    Expand(u8),
    Contract(u8),
    /// Push when the actor is contracted (label 0..5), pull when it is expanded (label 0..9).
    Handover(u8),
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Movement::Idle => f.write_str("idle"),
            Movement::Expand(i) => write!(f, "expand{i}"),
            Movement::Contract(i) => write!(f, "contract{i}"),
            Movement::Handover(i) => write!(f, "handover{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Particle<P, F> {
    pub phi: P,
    pub o: u8,
    pub head: Coord,
    pub tail: Option<Coord>,
    pub flags: Flags<F>,
}

/// Which node of an expanded particle an edge leaves from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Head,
    Tail,
}

impl<P, F> Particle<P, F> {
    pub fn contracted(phi: P, o: u8, at: Coord) -> Self {
        Particle { phi, o, head: at, tail: None, flags: no_flags() }
    }

    pub fn is_expanded(&self) -> bool {
        self.tail.is_some()
    }

    pub fn nodes(&self) -> Vec<Coord> {
        std::iter::once(self.head).chain(self.tail).collect()
    }

    pub fn label_count(&self) -> u8 {
        if self.is_expanded() {
            10
        } else {
            6
        }
    }

    /// Tail direction from the head in local labels, `None` when contracted.
    pub fn tail_dir(&self) -> Option<u8> {
        let t = self.tail?;
        let g = TRI.dir_between(self.head, t).expect("tail adjacent to head");
        Some((g + 6 - self.o) % 6)
    }

    /// Global direction from tail to head.
    pub fn heading(&self) -> Option<u8> {
        self.tail.map(|t| TRI.dir_between(t, self.head).expect("tail adjacent to head"))
    }

    /// The node an edge label leaves from and its global direction.
    pub fn edge(&self, label: u8) -> Option<(End, Coord, u8)> {
        match self.tail {
            None => (label < 6).then(|| (End::Head, self.head, (self.o + label) % 6)),
            Some(t) => {
                if label >= 10 {
                    return None;
                }
                let e = self.heading().expect("expanded");
                let (end, dir) = expanded_edge(e, self.o, label);
                Some((end, if end == End::Head { self.head } else { t }, dir))
            }
        }
    }

    /// Edge label leaving `node` in global direction `dir`, if that edge is external.
    pub fn label_of(&self, node: Coord, dir: u8) -> Option<u8> {
        (0..self.label_count()).find(|&l| matches!(self.edge(l), Some((_, n, d)) if n == node && d == dir))
    }
}

/// Clockwise boundary walk of an expanded particle heading in global direction `e`,
/// as (end, global direction) pairs. Labels start at the edge pointing along `o`
/// whose target touches only one of the two nodes.
fn expanded_walk(e: u8) -> [(End, u8); 10] {
    let d = |k: u8| (e + k) % 6;
    [
        (End::Head, d(4)),
        (End::Head, d(5)),
        (End::Head, d(0)),
        (End::Head, d(1)),
        (End::Head, d(2)),
        (End::Tail, d(1)),
        (End::Tail, d(2)),
        (End::Tail, d(3)),
        (End::Tail, d(4)),
        (End::Tail, d(5)),
    ]
}

fn expanded_edge(e: u8, o: u8, label: u8) -> (End, u8) {
    let rel = (o + 6 - e) % 6;
    let start = match rel {
        5 => 1,
        0 => 2,
        1 => 3,
        r => 4 + r as usize,
    };
    expanded_walk(e)[(start + label as usize) % 10]
}

/// Contraction label pairs (type, label) that contract into the tail.
pub const CONTRACT_TAIL: [(u8, u8); 6] = [(0, 5), (1, 6), (2, 9), (3, 0), (4, 1), (5, 4)];
/// Contraction label pairs (type, label) that contract into the head.
pub const CONTRACT_HEAD: [(u8, u8); 6] = [(0, 0), (1, 1), (2, 4), (3, 5), (4, 6), (5, 9)];

/// Which end a contraction along `label` keeps, for a particle that expanded along local `kind`.
pub fn contract_end(kind: u8, label: u8) -> Option<End> {
    let e = kind % 6;
    (label < 10).then(|| expanded_edge(e, 0, label).0)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn<P, F> {
    pub phi: P,
    pub flags: Flags<F>,
    pub movement: Movement,
}

/// Transition function: state, flags read per label, tail direction -> turns.
pub trait Delta<P, F>: Send + Sync {
    fn turns(&self, phi: &P, read: &Flags<F>, tail: Option<u8>) -> Vec<Turn<P, F>>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlagPat<F> {
    Any,
    Is(Option<F>),
}

#[derive(Clone, Debug)]
pub struct DeltaEntry<P, F> {
    pub phi: P,
    pub read: [FlagPat<F>; 10],
    /// `None` matches any tail direction.
    pub tail: Option<Option<u8>>,
    pub turns: Vec<Turn<P, F>>,
}

/// Explicit transition table; every matching entry contributes its turns.
#[derive(Clone, Debug, Default)]
pub struct DeltaTable<P, F> {
    pub entries: Vec<DeltaEntry<P, F>>,
}

impl<P: Species, F: Species> Delta<P, F> for DeltaTable<P, F> {
    fn turns(&self, phi: &P, read: &Flags<F>, tail: Option<u8>) -> Vec<Turn<P, F>> {
        let mut out = Vec::new();
        for e in &self.entries {
            if &e.phi != phi || e.tail.is_some_and(|t| t != tail) {
                continue;
            }
            let ok = e.read.iter().zip(read.iter()).all(|(p, r)| match p {
                FlagPat::Any => true,
                FlagPat::Is(x) => x == r,
            });
            if ok {
                for t in &e.turns {
                    if !out.contains(t) {
                        out.push(t.clone());
                    }
                }
            }
        }
        out
    }
}

/// Particles sorted by head position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmoebotConfig<P, F> {
    pub particles: Vec<Particle<P, F>>,
}

impl<P: fmt::Display, F> fmt::Display for AmoebotConfig<P, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.particles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}@{}", p.phi, p.o, p.head)?;
            if let Some(t) = p.tail {
                write!(f, "-{t}")?;
            }
        }
        write!(f, "}}")
    }
}

impl<P: Species, F: Species> AmoebotConfig<P, F> {
    pub fn new(mut particles: Vec<Particle<P, F>>) -> Result<Self, AmoebotError> {
        particles.sort();
        let cfg = AmoebotConfig { particles };
        let mut seen = BTreeSet::new();
        for p in &cfg.particles {
            for n in p.nodes() {
                if !seen.insert(n) {
                    return Err(AmoebotError::Overlap(n));
                }
            }
        }
        Ok(cfg)
    }

    pub fn occupancy(&self) -> HashMap<Coord, usize> {
        let mut m = HashMap::new();
        for (i, p) in self.particles.iter().enumerate() {
            for n in p.nodes() {
                m.insert(n, i);
            }
        }
        m
    }

    pub fn at(&self, c: Coord) -> Option<usize> {
        self.particles.iter().position(|p| p.head == c || p.tail == Some(c))
    }

    pub fn is_connected(&self) -> bool {
        let occ = self.occupancy();
        let Some(&start) = occ.keys().min() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            for n in TRI.neighbors(c) {
                if occ.contains_key(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == occ.len()
    }

    /// Flags facing particle `i`, indexed by its own labels.
    pub fn read_flags(&self, i: usize) -> Flags<F> {
        let occ = self.occupancy();
        let p = &self.particles[i];
        let mut out = no_flags();
        for l in 0..p.label_count() {
            let (_, node, dir) = p.edge(l).expect("label in range");
            let w = TRI.step(node, dir);
            if let Some(&j) = occ.get(&w) {
                if j == i {
                    continue;
                }
                let q = &self.particles[j];
                if let Some(ql) = q.label_of(w, TRI.opposite(dir)) {
                    out[l as usize] = q.flags[ql as usize].clone();
                }
            }
        }
        out
    }

    pub fn touches_boundary(&self, rg: &Region) -> bool {
        self.particles.iter().flat_map(|p| p.nodes()).any(|c| rg.on_boundary(c))
    }

    /// Node -> (state, is head) view for rendering and comparison.
    pub fn cells(&self) -> BTreeMap<Coord, (P, bool)> {
        let mut m = BTreeMap::new();
        for p in &self.particles {
            m.insert(p.head, (p.phi.clone(), true));
            if let Some(t) = p.tail {
                m.insert(t, (p.phi.clone(), false));
            }
        }
        m
    }
}

/// Carries flags of the node that survives a forced contraction to its new labels.
pub(crate) fn reflag_contracted<P: Clone, F: Clone>(p: &Particle<P, F>, keep: Coord) -> Particle<P, F> {
    let mut q = Particle { phi: p.phi.clone(), o: p.o, head: keep, tail: None, flags: no_flags() };
    for l in 0..6u8 {
        let (_, node, dir) = q.edge(l).expect("contracted label");
        if let Some(old) = p.label_of(node, dir) {
            q.flags[l as usize] = p.flags[old as usize].clone();
        }
    }
    q
}

/// Carries the flags of a contracted particle forced to expand from `tail` into `head`.
fn reflag_expanded<P: Clone, F: Clone>(p: &Particle<P, F>, head: Coord) -> Particle<P, F> {
    let mut q = Particle { phi: p.phi.clone(), o: p.o, head, tail: Some(p.head), flags: no_flags() };
    for l in 0..10u8 {
        let (_, node, dir) = q.edge(l).expect("expanded label");
        if let Some(old) = p.label_of(node, dir) {
            q.flags[l as usize] = p.flags[old as usize].clone();
        }
    }
    q
}

/// Applies a turn of particle `i`.
pub fn apply_turn<P: Species, F: Species>(
    cfg: &AmoebotConfig<P, F>,
    i: usize,
    turn: &Turn<P, F>,
) -> Result<AmoebotConfig<P, F>, AmoebotError> {
    let occ = cfg.occupancy();
    let p = &cfg.particles[i];
    let mut parts = cfg.particles.clone();
    let mut me = Particle { phi: turn.phi.clone(), o: p.o, head: p.head, tail: p.tail, flags: turn.flags.clone() };
    match turn.movement {
        Movement::Idle => {}
        Movement::Expand(l) => {
            if p.is_expanded() {
                return Err(AmoebotError::AlreadyExpanded);
            }
            let (_, node, dir) = p.edge(l).ok_or(AmoebotError::BadLabel(l))?;
            let target = TRI.step(node, dir);
            if occ.contains_key(&target) {
                return Err(AmoebotError::TargetOccupied(target));
            }
            me.head = target;
            me.tail = Some(p.head);
        }
        Movement::Contract(l) => {
            let (end, _, _) = p.edge(l).ok_or(AmoebotError::BadLabel(l))?;
            if !p.is_expanded() {
                return Err(AmoebotError::AlreadyContracted);
            }
            me.head = if end == End::Head { p.head } else { p.tail.expect("expanded") };
            me.tail = None;
        }
        Movement::Handover(l) => {
            let (_, node, dir) = p.edge(l).ok_or(AmoebotError::BadLabel(l))?;
            let target = TRI.step(node, dir);
            let j = *occ.get(&target).ok_or(AmoebotError::NoPartner(target))?;
            let q = &cfg.particles[j];
            if !p.is_expanded() {
                if !q.is_expanded() {
                    return Err(AmoebotError::NoPartner(target));
                }
                let keep = if q.head == target { q.tail.expect("expanded") } else { q.head };
                parts[j] = reflag_contracted(q, keep);
                me.head = target;
                me.tail = Some(p.head);
            } else {
                if q.is_expanded() {
                    return Err(AmoebotError::NoPartner(target));
                }
                let keep = if node == p.head { p.tail.expect("expanded") } else { p.head };
                parts[j] = reflag_expanded(q, node);
                me.head = keep;
                me.tail = None;
            }
        }
    }
    if !me.is_expanded() {
        for f in me.flags.iter_mut().skip(6) {
            *f = None;
        }
    }
    parts[i] = me;
    AmoebotConfig::new(parts)
}

#[derive(Clone)]
pub struct AmoebotSystem<P: Species, F: Species> {
    pub delta: Arc<dyn Delta<P, F>>,
    pub initial: AmoebotConfig<P, F>,
}

impl<P: Species, F: Species> fmt::Debug for AmoebotSystem<P, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmoebotSystem({} particles)", self.initial.particles.len())
    }
}

impl<P: Species, F: Species> AmoebotSystem<P, F> {
    pub fn new(delta: Arc<dyn Delta<P, F>>, initial: AmoebotConfig<P, F>) -> Self {
        AmoebotSystem { delta, initial }
    }

    /// Turns of particle `i` with their validity.
    pub fn enabled_turns(&self, cfg: &AmoebotConfig<P, F>, i: usize) -> Vec<(Turn<P, F>, Result<AmoebotConfig<P, F>, AmoebotError>)> {
        let p = &cfg.particles[i];
        let read = cfg.read_flags(i);
        self.delta
            .turns(&p.phi, &read, p.tail_dir())
            .into_iter()
            .map(|t| {
                let r = apply_turn(cfg, i, &t);
                (t, r)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TurnEvent {
    pub at: Coord,
    pub turn: usize,
}

impl fmt::Display for TurnEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule={} at={} dir=-", self.turn, self.at)
    }
}

impl<P: Species, F: Species> Model for AmoebotSystem<P, F> {
    type Config = AmoebotConfig<P, F>;
    type Event = TurnEvent;

    fn initial(&self) -> AmoebotConfig<P, F> {
        self.initial.clone()
    }

    fn successors(&self, cfg: &AmoebotConfig<P, F>, rg: &Region) -> Vec<(TurnEvent, AmoebotConfig<P, F>)> {
        let mut out = Vec::new();
        for i in 0..cfg.particles.len() {
            let at = cfg.particles[i].head;
            for (k, (_, r)) in self.enabled_turns(cfg, i).into_iter().enumerate() {
                if let Ok(next) = r {
                    if next.particles.iter().flat_map(|p| p.nodes()).all(|c| rg.contains(c)) {
                        out.push((TurnEvent { at, turn: k }, next));
                    }
                }
            }
        }
        out
    }

    fn touches_boundary(&self, cfg: &AmoebotConfig<P, F>, rg: &Region) -> bool {
        cfg.touches_boundary(rg)
    }

    fn apply(&self, cfg: &AmoebotConfig<P, F>, ev: &TurnEvent, rg: &Region) -> Result<AmoebotConfig<P, F>, StepError> {
        let i = cfg.at(ev.at).ok_or_else(|| StepError::InvalidTurn(format!("no particle at {}", ev.at)))?;
        let turns = self.enabled_turns(cfg, i);
        let (_, r) = turns.into_iter().nth(ev.turn).ok_or_else(|| StepError::Stale(ev.to_string()))?;
        let next = r.map_err(|e| StepError::InvalidTurn(e.to_string()))?;
        if !next.particles.iter().flat_map(|p| p.nodes()).all(|c| rg.contains(c)) {
            return Err(StepError::InvalidTurn("leaves the region".into()));
        }
        Ok(next)
    }
}
