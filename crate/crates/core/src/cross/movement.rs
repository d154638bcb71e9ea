//! Amoebot particles as clockwise surface CRNs: every node locks and records
//! the cells around it before its particle moves, and a push handover runs as
//! tie, contract, expand.

use crate::amoebot::{apply_turn, reflag_contracted, AmoebotConfig, AmoebotSystem, Delta, Flags, Movement, Particle, Turn};
use crate::compile::Compiled;
use crate::config::Configuration;
use crate::cross::lock::Lock;
use crate::lattice::{Coord, LatticeKind, Region};
use crate::scrn::{Flavor, RuleGen, ScrnSystem, Species};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const GENERATOR: &str = "amoebot-lock";

const TRI: LatticeKind = LatticeKind::Triangular6;

#[derive(Debug, Error)]
pub enum MovementError {
    #[error("particle node {0} lies outside the region")]
    OutsideRegion(Coord),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MovementMutation {
    None,
    /// Contractions keep the node the head/tail tables do not name.
    SwappedContractEnds,
}

/// The piece of a particle a node holds; expanded pieces carry the global tail-to-head direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Contracted,
    Tail(u8),
    Head(u8),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aux<P, F> {
    Idle,
    /// Pushing along local `label`, with the state and flags it takes afterwards.
    Push { label: u8, phi: P, flags: Flags<F> },
    Prepare,
    Waiting,
}

/// What a node recorded across one edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Seen<F> {
    Empty,
    Node { flag: Option<F>, expanded: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node<P, F> {
    pub phi: P,
    pub o: u8,
    pub part: Part,
    pub flags: Flags<F>,
    pub aux: Aux<P, F>,
    /// Indexed by global direction.
    pub seen: [Option<Seen<F>>; 6],
    pub locks: [Lock; 6],
    pub release: bool,
    pub pause: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell<P, F> {
    /// Unoccupied, with lock marks; a vacated node releases its own locks from here.
    Empty([Lock; 6]),
    Node(Box<Node<P, F>>),
}

fn opp(d: u8) -> u8 {
    TRI.opposite(d)
}

fn no_seen<F>() -> [Option<Seen<F>>; 6] {
    std::array::from_fn(|_| None)
}

fn normalized<F: Clone>(flags: &Flags<F>, expanded: bool) -> Flags<F> {
    let mut f = flags.clone();
    if !expanded {
        for x in f.iter_mut().skip(6) {
            *x = None;
        }
    }
    f
}

impl<P: Species, F: Species> Node<P, F> {
    /// Node of `p` sitting at `at`, with nothing observed yet.
    pub fn fresh(p: &Particle<P, F>, at: Coord) -> Self {
        let part = match p.heading() {
            None => Part::Contracted,
            Some(e) if at == p.head => Part::Head(e),
            Some(e) => Part::Tail(e),
        };
        Node {
            phi: p.phi.clone(),
            o: p.o,
            part,
            flags: p.flags.clone(),
            aux: Aux::Idle,
            seen: no_seen(),
            locks: [Lock::Free; 6],
            release: false,
            pause: false,
        }
    }

    fn partner_dir(&self) -> Option<u8> {
        match self.part {
            Part::Contracted => None,
            Part::Tail(e) => Some(e),
            Part::Head(e) => Some(opp(e)),
        }
    }

    fn external(&self) -> impl Iterator<Item = u8> + '_ {
        (0..6u8).filter(move |d| Some(*d) != self.partner_dir())
    }

    /// The particle this node belongs to, placed with this node at `at`.
    pub fn particle(&self, at: Coord) -> Particle<P, F> {
        let mut p = Particle::contracted(self.phi.clone(), self.o, at);
        p.flags = self.flags.clone();
        match self.part {
            Part::Contracted => {}
            Part::Tail(e) => {
                p.head = TRI.step(at, e);
                p.tail = Some(at);
            }
            Part::Head(e) => p.tail = Some(TRI.step(at, opp(e))),
        }
        p
    }

    fn ready(&self) -> bool {
        self.external().all(|d| self.locks[d as usize] == Lock::Holding && self.seen[d as usize].is_some())
    }

    fn held_count(&self) -> usize {
        self.locks.iter().filter(|l| **l == Lock::Held).count()
    }

    fn holding(&self) -> bool {
        self.locks.contains(&Lock::Holding)
    }

    fn active(&self) -> bool {
        self.aux == Aux::Idle && !self.release && !self.pause
    }

    /// Ready to fire its particle's transition.
    fn primed(&self) -> bool {
        self.active() && self.held_count() == 0 && self.ready()
    }

    fn bare(&self) -> Self {
        Node { seen: no_seen(), locks: [Lock::Free; 6], release: false, pause: false, ..self.clone() }
    }

}

impl<P: Species, F: Species> Cell<P, F> {
    pub fn blank() -> Self {
        Cell::Empty([Lock::Free; 6])
    }

    fn node(&self) -> Option<&Node<P, F>> {
        match self {
            Cell::Node(n) => Some(n),
            Cell::Empty(_) => None,
        }
    }

    fn mark(&self, d: u8) -> Lock {
        match self {
            Cell::Empty(l) => l[d as usize],
            Cell::Node(n) => n.locks[d as usize],
        }
    }

    fn with_mark(&self, d: u8, l: Lock) -> Self {
        let mut c = self.clone();
        match &mut c {
            Cell::Empty(m) => m[d as usize] = l,
            Cell::Node(n) => n.locks[d as usize] = l,
        }
        c
    }

    /// A node can record and lock this cell.
    fn observable(&self) -> bool {
        match self {
            Cell::Empty(l) => !l.contains(&Lock::Holding),
            Cell::Node(n) => n.aux == Aux::Idle && !n.release,
        }
    }

    /// What a neighbor in direction `d` reads across the shared edge.
    fn view(&self, d: u8) -> Seen<F> {
        match self {
            Cell::Empty(_) => Seen::Empty,
            Cell::Node(n) => {
                let p = n.particle(Coord::ORIGIN);
                let flag = p.label_of(Coord::ORIGIN, d).and_then(|l| n.flags[l as usize].clone());
                Seen::Node { flag, expanded: n.part != Part::Contracted }
            }
        }
    }
}

fn seen_flag<F: Clone>(s: &Option<Seen<F>>) -> Option<F> {
    match s {
        Some(Seen::Node { flag, .. }) => flag.clone(),
        _ => None,
    }
}

/// Turns a particle can carry out on its records, and whether it has nothing left to do.
struct Plan<P, F> {
    moves: Vec<Turn<P, F>>,
    pause: bool,
}

/// `rec(label)` is the record across that edge of the particle.
fn plan<P: Species, F: Species>(
    delta: &dyn Delta<P, F>,
    p: &Particle<P, F>,
    rec: impl Fn(u8) -> Option<Seen<F>>,
) -> Plan<P, F> {
    let mut read: Flags<F> = crate::amoebot::no_flags();
    for l in 0..p.label_count() {
        read[l as usize] = seen_flag(&rec(l));
    }
    let expanded = p.is_expanded();
    let mut moves = Vec::new();
    let mut pause = true;
    for t in delta.turns(&p.phi, &read, p.tail_dir()) {
        match t.movement {
            Movement::Idle => {
                if t.phi != p.phi || normalized(&t.flags, expanded) != normalized(&p.flags, expanded) {
                    moves.push(t);
                    pause = false;
                }
            }
            Movement::Expand(l) => {
                if !expanded && l < 6 && rec(l) == Some(Seen::Empty) {
                    moves.push(t);
                    pause = false;
                }
            }
            Movement::Contract(l) => {
                if expanded && l < 10 {
                    moves.push(t);
                    pause = false;
                }
            }
            Movement::Handover(l) => match rec(l) {
                Some(Seen::Node { expanded: true, .. }) if !expanded && l < 6 => {
                    moves.push(t);
                    pause = false;
                }
                // pulls are not simulated, but a possible one keeps the particle awake
                Some(Seen::Node { expanded: false, .. }) if expanded => pause = false,
                _ => {}
            },
        }
    }
    Plan { moves, pause }
}

fn contracted_plan<P: Species, F: Species>(delta: &dyn Delta<P, F>, n: &Node<P, F>) -> Plan<P, F> {
    let p = n.particle(Coord::ORIGIN);
    plan(delta, &p, |l| n.seen[((n.o + l) % 6) as usize].clone())
}

/// Plan of the expanded particle whose tail node is `t` and head node `h`.
fn expanded_plan<P: Species, F: Species>(delta: &dyn Delta<P, F>, t: &Node<P, F>, h: &Node<P, F>) -> (Particle<P, F>, Plan<P, F>) {
    let p = t.particle(Coord::ORIGIN);
    let pl = plan(delta, &p, |l| {
        let (end, _, dir) = p.edge(l)?;
        let n = if end == crate::amoebot::End::Tail { t } else { h };
        n.seen[dir as usize].clone()
    });
    (p, pl)
}

fn single<P: Species, F: Species>(p: Particle<P, F>, t: &Turn<P, F>) -> Option<Particle<P, F>> {
    let cfg = AmoebotConfig::new(vec![p]).ok()?;
    apply_turn(&cfg, 0, t).ok().map(|c| c.particles[0].clone())
}

pub struct MovementRules<P, F> {
    delta: Arc<dyn Delta<P, F>>,
    mutation: MovementMutation,
}

type Pair<P, F> = (Cell<P, F>, Cell<P, F>);

impl<P: Species, F: Species> MovementRules<P, F> {
    fn boxed(n: Node<P, F>) -> Cell<P, F> {
        Cell::Node(Box::new(n))
    }

    /// Events between the two nodes of one expanded particle, `t` being the tail.
    fn internal(&self, t: &Node<P, F>, h: &Node<P, F>, e: u8, out: &mut Vec<Pair<P, F>>) {
        if h.part != Part::Head(e) {
            return;
        }
        if t.primed() && h.primed() {
            let (p, pl) = expanded_plan(&*self.delta, t, h);
            for turn in &pl.moves {
                match turn.movement {
                    Movement::Idle => {
                        let upd = |n: &Node<P, F>| Node { phi: turn.phi.clone(), flags: turn.flags.clone(), release: true, ..n.clone() };
                        out.push((Self::boxed(upd(t)), Self::boxed(upd(h))));
                    }
                    Movement::Contract(_) => {
                        let Some(r) = single(p.clone(), turn) else { continue };
                        let mut keep_tail = r.head == Coord::ORIGIN;
                        if self.mutation == MovementMutation::SwappedContractEnds {
                            keep_tail = !keep_tail;
                        }
                        let (kept, gone) = if keep_tail { (t, h) } else { (h, t) };
                        let node = Node { phi: r.phi, part: Part::Contracted, flags: r.flags, release: true, ..kept.clone() };
                        let vacated = Cell::Empty(gone.locks);
                        out.push(if keep_tail { (Self::boxed(node), vacated) } else { (vacated, Self::boxed(node)) });
                    }
                    _ => {}
                }
            }
            if pl.pause {
                let stop = |n: &Node<P, F>| Node { release: true, pause: true, ..n.clone() };
                out.push((Self::boxed(stop(t)), Self::boxed(stop(h))));
            }
        }
        // one node noticed a change while both were paused
        if t.aux == Aux::Idle && h.aux == Aux::Idle && !t.release && !h.release && t.pause != h.pause {
            out.push((Self::boxed(Node { pause: false, ..t.clone() }), Self::boxed(Node { pause: false, ..h.clone() })));
        }
        // the pushed particle contracts into the node it keeps
        let prepared = match (&t.aux, &h.aux) {
            (Aux::Prepare, Aux::Idle) => Some(false),
            (Aux::Idle, Aux::Prepare) => Some(true),
            _ => None,
        };
        if let Some(keep_tail) = prepared {
            let (kept, prep) = if keep_tail { (t, h) } else { (h, t) };
            if prep.held_count() == 1 {
                let e_particle = t.particle(Coord::ORIGIN);
                let at = if keep_tail { Coord::ORIGIN } else { TRI.step(Coord::ORIGIN, e) };
                let c = reflag_contracted(&e_particle, at);
                let node = Node { part: Part::Contracted, flags: c.flags, release: true, pause: false, ..kept.clone() };
                let waiting = Node { aux: Aux::Waiting, ..prep.clone() };
                out.push(if keep_tail {
                    (Self::boxed(node), Self::boxed(waiting))
                } else {
                    (Self::boxed(waiting), Self::boxed(node))
                });
            }
        }
    }

    /// Events of node `n` with the cell `b` in global direction `g`, across an external edge.
    fn external(&self, n: &Node<P, F>, b: &Cell<P, F>, g: u8, out: &mut Vec<Pair<P, F>>) {
        let d = g as usize;
        let od = opp(g);
        let mark = b.mark(od);
        // lock and record
        if n.active() && n.locks[d] == Lock::Free && n.held_count() == 0 && b.observable() && mark == Lock::Free {
            let mut x = n.clone();
            x.seen[d] = Some(b.view(od));
            x.locks[d] = Lock::Holding;
            out.push((Self::boxed(x), b.with_mark(od, Lock::Held)));
        }
        // unlock, before the transition or while releasing
        if n.locks[d] == Lock::Holding && mark == Lock::Held && !(n.pause && !n.release) && !matches!(n.aux, Aux::Push { .. }) {
            let mut x = n.clone();
            x.locks[d] = Lock::Free;
            out.push((Self::boxed(x), b.with_mark(od, Lock::Free)));
        }
        // a paused node notices a changed neighbor
        if n.aux == Aux::Idle && n.pause && !n.release && n.locks[d] == Lock::Free && mark == Lock::Free && b.observable() {
            let v = b.view(od);
            if n.seen[d].as_ref().is_some_and(|s| *s != v) {
                let mut x = n.clone();
                x.seen[d] = Some(v);
                x.pause = false;
                out.push((Self::boxed(x), b.clone()));
            }
        }
        if n.part == Part::Contracted && n.primed() {
            let pl = contracted_plan(&*self.delta, n);
            for turn in &pl.moves {
                match (turn.movement, b) {
                    (Movement::Expand(i), Cell::Empty(m)) if (n.o + i) % 6 == g => {
                        let only_mine = (0..6u8).all(|k| m[k as usize] == if k == od { Lock::Held } else { Lock::Free });
                        let Some(r) = single(n.particle(Coord::ORIGIN), turn).filter(|_| only_mine) else { continue };
                        let mut tail = Node { phi: r.phi.clone(), part: Part::Tail(g), flags: r.flags.clone(), release: true, ..n.clone() };
                        tail.seen[d] = None;
                        tail.locks[d] = Lock::Free;
                        let head = Node {
                            part: Part::Head(g),
                            seen: no_seen(),
                            locks: [Lock::Free; 6],
                            ..tail.clone()
                        };
                        out.push((Self::boxed(tail), Self::boxed(head)));
                    }
                    (Movement::Handover(i), Cell::Node(m)) if (n.o + i) % 6 == g => {
                        if m.part == Part::Contracted || m.aux != Aux::Idle || m.release || mark != Lock::Held || m.held_count() != 1 {
                            continue;
                        }
                        let here = n.particle(Coord::ORIGIN);
                        let there = m.particle(TRI.step(Coord::ORIGIN, g));
                        let Ok(cfg) = AmoebotConfig::new(vec![here, there]) else { continue };
                        let Some(me) = cfg.at(Coord::ORIGIN) else { continue };
                        let Ok(next) = apply_turn(&cfg, me, turn) else { continue };
                        let Some(pusher) = next.particles.iter().find(|p| p.tail == Some(Coord::ORIGIN)) else { continue };
                        let x = Node { aux: Aux::Push { label: i, phi: pusher.phi.clone(), flags: pusher.flags.clone() }, ..n.clone() };
                        let y = Node { aux: Aux::Prepare, ..(**m).clone() };
                        out.push((Self::boxed(x), Self::boxed(y)));
                    }
                    _ => {}
                }
            }
        }
        if let (Aux::Push { label, phi, flags }, Cell::Node(m)) = (&n.aux, b) {
            if (n.o + label) % 6 != g {
                return;
            }
            match m.aux {
                // the tie is reversible
                Aux::Prepare => {
                    out.push((Self::boxed(Node { aux: Aux::Idle, ..n.clone() }), Self::boxed(Node { aux: Aux::Idle, ..(**m).clone() })));
                }
                Aux::Waiting if n.held_count() == 0 && m.held_count() == 1 && mark == Lock::Held => {
                    let mut tail = Node {
                        phi: phi.clone(),
                        part: Part::Tail(g),
                        flags: flags.clone(),
                        aux: Aux::Idle,
                        release: true,
                        pause: false,
                        ..n.clone()
                    };
                    tail.seen[d] = None;
                    tail.locks[d] = Lock::Free;
                    let mut locks = m.locks;
                    locks[od as usize] = Lock::Free;
                    let head = Node { part: Part::Head(g), seen: no_seen(), locks, ..tail.clone() };
                    out.push((Self::boxed(tail), Self::boxed(head)));
                }
                _ => {}
            }
        }
    }
}

impl<P: Species, F: Species> RuleGen<Cell<P, F>> for MovementRules<P, F> {
    fn name(&self) -> &str {
        GENERATOR
    }

    fn uni(&self, a: &Cell<P, F>, out: &mut Vec<Cell<P, F>>) {
        let Cell::Node(n) = a else { return };
        if n.part == Part::Contracted && n.primed() {
            let pl = contracted_plan(&*self.delta, n);
            for t in pl.moves.iter().filter(|t| t.movement == Movement::Idle) {
                out.push(Self::boxed(Node { phi: t.phi.clone(), flags: normalized(&t.flags, false), release: true, ..(**n).clone() }));
            }
            if pl.pause {
                out.push(Self::boxed(Node { release: true, pause: true, ..(**n).clone() }));
            }
        }
        if n.release && !n.holding() {
            out.push(Self::boxed(Node { release: false, ..(**n).clone() }));
        }
    }

    fn bi(&self, a: &Cell<P, F>, b: &Cell<P, F>, dir: u8, out: &mut Vec<Pair<P, F>>) {
        match a {
            Cell::Empty(m) => {
                if m[dir as usize] == Lock::Holding && b.mark(opp(dir)) == Lock::Held {
                    out.push((a.with_mark(dir, Lock::Free), b.with_mark(opp(dir), Lock::Free)));
                }
            }
            Cell::Node(n) => match (n.part, b) {
                (Part::Tail(e), Cell::Node(h)) if e == dir => self.internal(n, h, e, out),
                _ if n.partner_dir() == Some(dir) => {}
                _ => self.external(n, b, dir, out),
            },
        }
    }

    fn blank_active(&self) -> bool {
        false
    }
}

/// Drops the observation layer; `None` while a handover is under way.
pub fn represent<P: Species, F: Species>(c: &Cell<P, F>) -> Option<Cell<P, F>> {
    match c {
        Cell::Empty(_) => Some(Cell::blank()),
        Cell::Node(n) if n.aux == Aux::Idle => Some(Cell::Node(Box::new(n.bare()))),
        Cell::Node(_) => None,
    }
}

pub type MovementCompiled<P, F> = Compiled<ScrnSystem<Cell<P, F>>, Cell<P, F>, Cell<P, F>>;

/// Particle configuration with every node fresh.
pub fn encode<P: Species, F: Species>(cfg: &AmoebotConfig<P, F>) -> Configuration<Cell<P, F>> {
    let mut out = Configuration::empty(Cell::blank(), TRI);
    for p in &cfg.particles {
        for at in p.nodes() {
            out.set(at, Cell::Node(Box::new(Node::fresh(p, at))));
        }
    }
    out
}

/// The particle configuration a node configuration stands for.
pub fn project<P: Species, F: Species>(cfg: &Configuration<Cell<P, F>>) -> Option<AmoebotConfig<P, F>> {
    let mut parts = Vec::new();
    for (at, c) in cfg.iter() {
        let Cell::Node(n) = c else { continue };
        if n.aux != Aux::Idle {
            return None;
        }
        match n.part {
            Part::Contracted => parts.push(n.particle(at)),
            Part::Tail(e) => {
                let h = cfg.get(TRI.step(at, e)).node()?;
                let same = h.part == Part::Head(e) && h.aux == Aux::Idle && h.phi == n.phi && h.o == n.o && h.flags == n.flags;
                if !same {
                    return None;
                }
                parts.push(n.particle(at));
            }
            Part::Head(e) => {
                let t = cfg.get(TRI.step(at, opp(e))).node()?;
                if t.part != Part::Tail(e) {
                    return None;
                }
            }
        }
    }
    AmoebotConfig::new(parts).ok()
}

pub fn compile<P: Species, F: Species>(src: &AmoebotSystem<P, F>, rg: &Region) -> Result<MovementCompiled<P, F>, MovementError> {
    compile_with(src, rg, MovementMutation::None)
}

pub fn compile_with<P: Species, F: Species>(
    src: &AmoebotSystem<P, F>,
    rg: &Region,
    mutation: MovementMutation,
) -> Result<MovementCompiled<P, F>, MovementError> {
    if let Some(c) = src.initial.particles.iter().flat_map(|p| p.nodes()).find(|c| !rg.contains(*c)) {
        return Err(MovementError::OutsideRegion(c));
    }
    let rules = Arc::new(MovementRules { delta: src.delta.clone(), mutation });
    let system = ScrnSystem::generated(Flavor::Clockwise, Cell::blank(), encode(&src.initial), rules);
    Ok(Compiled { system, represent: Arc::new(represent), provenance: Vec::new() })
}

/// Encoding of `cfg` after a round of observation: particles with nothing to
/// do are paused on accurate records, and a particle with a move whose cells
/// nobody else has locked holds every lock it needs. Others stay fresh.
pub fn settled<P: Species, F: Species>(src: &AmoebotSystem<P, F>, cfg: &AmoebotConfig<P, F>, rg: &Region) -> Configuration<Cell<P, F>> {
    let fresh = encode(cfg);
    let mut out = fresh.clone();
    let records = |at: Coord, n: &Node<P, F>| {
        let mut seen = no_seen();
        for d in n.external() {
            seen[d as usize] = Some(fresh.get(TRI.step(at, d)).view(opp(d)));
        }
        seen
    };
    let mut active = Vec::new();
    for p in &cfg.particles {
        let nodes: Vec<(Coord, Node<P, F>)> = p
            .nodes()
            .into_iter()
            .map(|at| {
                let mut n = fresh.get(at).node().expect("encoded node").clone();
                n.seen = records(at, &n);
                (at, n)
            })
            .collect();
        let pl = match &nodes[..] {
            [(_, n)] => contracted_plan(&*src.delta, n),
            [(_, a), (_, b)] => {
                let (t, h) = if matches!(a.part, Part::Tail(_)) { (a, b) } else { (b, a) };
                expanded_plan(&*src.delta, t, h).1
            }
            _ => unreachable!("a particle has one or two nodes"),
        };
        if pl.pause {
            for (at, n) in nodes {
                out.set(at, Cell::Node(Box::new(Node { pause: true, ..n })));
            }
        } else {
            active.push(nodes);
        }
    }
    for nodes in active {
        let free = nodes.iter().all(|(at, n)| {
            out.get(*at).node().is_some_and(|m| m.held_count() == 0)
                && n.external().all(|d| {
                    let w = TRI.step(*at, d);
                    rg.contains(w) && out.get(w).mark(opp(d)) == Lock::Free && out.get(w).node().is_none_or(|m| !m.holding())
                })
        });
        if !free {
            continue;
        }
        for (at, mut n) in nodes {
            n.locks = out.get(at).node().expect("encoded node").locks;
            for d in n.external().collect::<Vec<_>>() {
                n.locks[d as usize] = Lock::Holding;
                let w = TRI.step(at, d);
                let marked = out.get(w).with_mark(opp(d), Lock::Held);
                out.set(w, marked);
            }
            out.set(at, Cell::Node(Box::new(n)));
        }
    }
    out
}

/// Nodes in the middle of a handover, as (prepare, waiting) counts.
pub fn handover_nodes<P: Species, F: Species>(cfg: &Configuration<Cell<P, F>>) -> (usize, usize) {
    let mut counts = (0, 0);
    for (_, c) in cfg.iter() {
        match c.node().map(|n| &n.aux) {
            Some(Aux::Prepare) => counts.0 += 1,
            Some(Aux::Waiting) => counts.1 += 1,
            _ => {}
        }
    }
    counts
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Part::Contracted => Ok(()),
            Part::Tail(e) => write!(f, "/t{e}"),
            Part::Head(e) => write!(f, "/h{e}"),
        }
    }
}

fn write_flags<F: fmt::Display>(f: &mut fmt::Formatter<'_>, flags: &Flags<F>) -> fmt::Result {
    if flags.iter().all(Option::is_none) {
        return Ok(());
    }
    f.write_str("{")?;
    for (i, x) in flags.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        match x {
            Some(x) => write!(f, "{x}")?,
            None => f.write_str("_")?,
        }
    }
    f.write_str("}")
}

fn write_locks(f: &mut fmt::Formatter<'_>, locks: &[Lock; 6]) -> fmt::Result {
    for l in locks {
        f.write_str(match l {
            Lock::Free => ".",
            Lock::Holding => "1",
            Lock::Held => "0",
        })?;
    }
    Ok(())
}

impl<P: fmt::Display, F: fmt::Display> fmt::Display for Cell<P, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Empty(m) => {
                f.write_str("O")?;
                if m.iter().any(|l| *l != Lock::Free) {
                    f.write_str("[")?;
                    write_locks(f, m)?;
                    f.write_str("]")?;
                }
                Ok(())
            }
            Cell::Node(n) => {
                write!(f, "{}{}", n.phi, n.part)?;
                if n.o != 0 {
                    write!(f, "@{}", n.o)?;
                }
                write_flags(f, &n.flags)?;
                match &n.aux {
                    Aux::Idle => {}
                    Aux::Push { label, phi, .. } => write!(f, "!push{label}:{phi}")?,
                    Aux::Prepare => f.write_str("!prep")?,
                    Aux::Waiting => f.write_str("!wait")?,
                }
                let bare = n.seen.iter().all(Option::is_none) && n.locks == [Lock::Free; 6] && !n.release && !n.pause;
                if bare {
                    return Ok(());
                }
                f.write_str("[")?;
                for s in &n.seen {
                    match s {
                        None => f.write_str("_")?,
                        Some(Seen::Empty) => f.write_str("o")?,
                        Some(Seen::Node { expanded, .. }) => f.write_str(if *expanded { "x" } else { "c" })?,
                    }
                }
                f.write_str("|")?;
                write_locks(f, &n.locks)?;
                write!(f, "|{}{}]", n.release as u8, n.pause as u8)
            }
        }
    }
}
