//! Tile assembly (aTAM and affinity-strengthening tile automata) on unit-seeded
//! directed surface CRNs through observing species.

use crate::assembly::{null, AssemblyError, AtamSystem, TaOrient, TaSystem, NULL};
use crate::compile::{Compiled, Provenance, RuleSet};
use crate::config::Configuration;
use crate::lattice::{Coord, LatticeKind, E, S};
use crate::scrn::{Flavor, Name, Orient, Reaction, RuleGen, ScrnError, ScrnSystem};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const ATAM: &str = "atam";
pub const TA: &str = "ta";

#[derive(Debug, Error)]
pub enum ObserveError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Scrn(#[from] ScrnError),
}

/// One recorded side of an observer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rec {
    Eps,
    Seen(Name),
}

impl fmt::Display for Rec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rec::Eps => f.write_str("_"),
            Rec::Seen(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Blank,
    Tile(Name),
    /// Labels (or states) seen in N, E, S, W order.
    Obs([Rec; 4]),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Blank => f.write_str("O"),
            Cell::Tile(t) => write!(f, "{t}"),
            Cell::Obs([n, e, s, w]) => write!(f, "obs({n},{e},{s},{w})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObserveMutation {
    None,
    /// Attachment threshold lowered by one.
    LowThreshold,
    /// Vertical transitions emitted as horizontal ones.
    VerticalAsHorizontal,
}

pub type TileCompiled = Compiled<ScrnSystem<Cell>, Cell, Name>;

/// Tile species map to themselves, everything else to the empty tile.
pub fn represent(c: &Cell) -> Name {
    match c {
        Cell::Tile(t) => t.clone(),
        _ => null(),
    }
}

/// Every tuple over `alphabet` of the given length.
fn tuples(alphabet: &[Rec], len: usize) -> Vec<Vec<Rec>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                alphabet.iter().map(move |a| {
                    let mut t = t.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn records(alphabet: &[Rec]) -> Vec<[Rec; 4]> {
    tuples(alphabet, 4).into_iter().map(|t| [t[0].clone(), t[1].clone(), t[2].clone(), t[3].clone()]).collect()
}

fn opp(d: u8) -> u8 {
    (d + 2) % 4
}

fn set(rec: &[Rec; 4], d: u8, r: Rec) -> Cell {
    let mut rec = rec.clone();
    rec[d as usize] = r;
    Cell::Obs(rec)
}

fn full(rec: &[Rec; 4]) -> Option<[&Name; 4]> {
    let mut out = Vec::with_capacity(4);
    for r in rec {
        match r {
            Rec::Seen(n) => out.push(n),
            Rec::Eps => return None,
        }
    }
    Some([out[0], out[1], out[2], out[3]])
}

#[derive(Clone, Debug)]
enum Source {
    Atam(AtamSystem),
    Ta(TaSystem),
}

/// The observer rule family for one source system, evaluated on demand.
#[derive(Clone, Debug)]
pub struct ObserverRules {
    source: Source,
    mutation: ObserveMutation,
    tiles: Vec<Name>,
    /// Recordable values, null included.
    sigma: Vec<Rec>,
}

impl ObserverRules {
    pub fn protocol(&self) -> &'static str {
        match self.source {
            Source::Atam(_) => ATAM,
            Source::Ta(_) => TA,
        }
    }

    /// What an observer records for tile `t` lying in its direction d.
    fn seen(&self, t: &Name, d: u8) -> Name {
        match &self.source {
            Source::Atam(sys) => sys.tile(t).expect("known tile").glues[opp(d) as usize].clone(),
            Source::Ta(_) => t.clone(),
        }
    }

    fn item(&self, atam: u8, ta: u8) -> u8 {
        match self.source {
            Source::Atam(_) => atam,
            Source::Ta(_) => ta,
        }
    }

    /// Products of a single cell with their protocol item.
    pub fn uni_items(&self, a: &Cell) -> Vec<(u8, Cell)> {
        let Cell::Obs(rec) = a else { return Vec::new() };
        let Some(seen) = full(rec) else { return Vec::new() };
        let mut out = Vec::new();
        match &self.source {
            Source::Atam(sys) => {
                let tau = match self.mutation {
                    ObserveMutation::LowThreshold => sys.tau.saturating_sub(1),
                    _ => sys.tau,
                };
                for t in &sys.tiles {
                    let sum: u32 = (0..4).map(|d| sys.glue(&t.glues[d], seen[d])).sum();
                    if sum >= tau {
                        out.push((5, Cell::Tile(t.name.clone())));
                    }
                }
            }
            Source::Ta(sys) => {
                for t in &sys.attachable {
                    let sum: u32 = (0..4u8).map(|d| sys.affinity_towards(t, seen[d as usize], d)).sum();
                    if sum >= sys.tau {
                        out.push((4, Cell::Tile(t.clone())));
                    }
                }
            }
        }
        out
    }

    /// Products for `a` with `b` in global direction `dir` of `a`.
    pub fn bi_items(&self, a: &Cell, b: &Cell, dir: u8) -> Vec<(u8, Cell, Cell)> {
        let nul = || Rec::Seen(null());
        let mut out = Vec::new();
        match (a, b) {
            (Cell::Tile(_), Cell::Blank) => out.push((1, a.clone(), Cell::Obs([Rec::Eps, Rec::Eps, Rec::Eps, Rec::Eps]))),
            (Cell::Obs(rec), _) if rec[dir as usize] == Rec::Eps => match b {
                Cell::Blank => out.push((2, set(rec, dir, nul()), Cell::Blank)),
                Cell::Obs(other) => {
                    let back = opp(dir);
                    let partner = if other[back as usize] == Rec::Eps { set(other, back, nul()) } else { b.clone() };
                    out.push((self.item(3, 2), set(rec, dir, nul()), partner));
                }
                Cell::Tile(t) => out.push((self.item(4, 2), set(rec, dir, Rec::Seen(self.seen(t, dir))), b.clone())),
            },
            (Cell::Obs(rec), Cell::Tile(t)) => {
                let now = Rec::Seen(self.seen(t, dir));
                if rec[dir as usize] == now {
                    return out;
                }
                if rec[dir as usize] == nul() {
                    out.push((self.item(4, 2), set(rec, dir, now), b.clone()));
                } else if matches!(self.source, Source::Ta(_)) && full(rec).is_some() {
                    out.push((3, set(rec, dir, now), b.clone()));
                }
            }
            (Cell::Tile(x), Cell::Tile(y)) => {
                if let Source::Ta(sys) = &self.source {
                    for r in &sys.rules {
                        let fires = match r.orient {
                            TaOrient::Horizontal => dir == E,
                            TaOrient::Vertical if self.mutation == ObserveMutation::VerticalAsHorizontal => dir == E,
                            TaOrient::Vertical => dir == S,
                        };
                        if fires && &r.x1 == x && &r.y1 == y {
                            out.push((5, Cell::Tile(r.x2.clone()), Cell::Tile(r.y2.clone())));
                        }
                    }
                }
            }
            _ => {}
        }
        out
    }

    /// Blank, tile and observer species.
    pub fn species(&self) -> Vec<Cell> {
        let mut v = vec![Cell::Blank];
        v.extend(self.tiles.iter().cloned().map(Cell::Tile));
        let mut eps = vec![Rec::Eps];
        eps.extend(self.sigma.iter().cloned());
        v.extend(records(&eps).into_iter().map(Cell::Obs));
        v
    }

    /// The whole family as an explicit table.
    pub fn materialize(&self) -> RuleSet<Cell> {
        let species = self.species();
        let protocol = self.protocol();
        let mut rules = RuleSet::new();
        for a in &species {
            for (item, b) in self.uni_items(a) {
                rules.push(Reaction::Uni { a: a.clone(), b }, &Provenance::new(protocol, item, describe(item, protocol)));
            }
            for b in &species {
                for dir in 0..4u8 {
                    for (item, c, d) in self.bi_items(a, b, dir) {
                        let r = Reaction::Bi { a: a.clone(), b: b.clone(), c, d, orient: Orient::Directed(dir) };
                        rules.push(r, &Provenance::new(protocol, item, describe(item, protocol)));
                    }
                }
            }
        }
        rules
    }
}

fn describe(item: u8, protocol: &str) -> &'static str {
    match (protocol, item) {
        (_, 1) => "tile spawns observer",
        (ATAM, 2) => "observer meets blank",
        (ATAM, 3) => "observer meets observer",
        (ATAM, 4) => "observer meets tile",
        (ATAM, _) => "attachment",
        (_, 2) => "observer records neighbor",
        (_, 3) => "observer updates a changed neighbor",
        (_, 4) => "attachment",
        _ => "state transition",
    }
}

impl RuleGen<Cell> for ObserverRules {
    fn name(&self) -> &str {
        self.protocol()
    }

    fn uni(&self, a: &Cell, out: &mut Vec<Cell>) {
        out.extend(self.uni_items(a).into_iter().map(|(_, c)| c));
    }

    fn bi(&self, a: &Cell, b: &Cell, dir: u8, out: &mut Vec<(Cell, Cell)>) {
        out.extend(self.bi_items(a, b, dir).into_iter().map(|(_, c, d)| (c, d)));
    }

    fn blank_active(&self) -> bool {
        false
    }
}

fn seed_config(seed: Name) -> Configuration<Cell> {
    Configuration::from_cells(Cell::Blank, LatticeKind::Square4, [(Coord::ORIGIN, Cell::Tile(seed))])
}

fn tile_represent() -> crate::compile::Represent<Cell, Name> {
    Arc::new(|c: &Cell| Some(represent(c)))
}

pub fn observer_rules_atam(sys: &AtamSystem, mutation: ObserveMutation) -> ObserverRules {
    let tiles: Vec<Name> = sys.tiles.iter().map(|t| t.name.clone()).collect();
    let mut labels: Vec<Name> = sys.tiles.iter().flat_map(|t| t.glues.iter().cloned()).collect();
    labels.push(null());
    labels.sort();
    labels.dedup();
    let sigma = labels.into_iter().map(Rec::Seen).collect();
    ObserverRules { source: Source::Atam(sys.clone()), mutation, tiles, sigma }
}

pub fn compile_atam(sys: &AtamSystem) -> Result<TileCompiled, ObserveError> {
    compile_atam_with(sys, ObserveMutation::None)
}

/// Explicit rule table.
pub fn compile_atam_with(sys: &AtamSystem, mutation: ObserveMutation) -> Result<TileCompiled, ObserveError> {
    let gen = observer_rules_atam(sys, mutation);
    let RuleSet { rules, provenance, .. } = gen.materialize();
    let seed = sys.tiles[sys.seed].name.clone();
    let system = ScrnSystem::new(Flavor::Directed, Cell::Blank, gen.species(), seed_config(seed), true, rules)?;
    Ok(Compiled { system, represent: tile_represent(), provenance })
}

/// Rejects systems whose transitions lower some affinity.
pub fn observer_rules_ta(sys: &TaSystem, mutation: ObserveMutation) -> Result<ObserverRules, ObserveError> {
    sys.check_affinity_strengthening()?;
    let tiles = sys.states.clone();
    debug_assert!(tiles.iter().all(|t| t.as_str() != NULL));
    let mut sigma: Vec<Rec> = tiles.iter().cloned().map(Rec::Seen).collect();
    sigma.push(Rec::Seen(null()));
    Ok(ObserverRules { source: Source::Ta(sys.clone()), mutation, tiles, sigma })
}

pub fn compile_ta(sys: &TaSystem) -> Result<TileCompiled, ObserveError> {
    compile_ta_with(sys, ObserveMutation::None)
}

/// Generated rule family; the explicit table grows with the sixth power of
/// the state count.
pub fn compile_ta_with(sys: &TaSystem, mutation: ObserveMutation) -> Result<TileCompiled, ObserveError> {
    let gen = observer_rules_ta(sys, mutation)?;
    let system = ScrnSystem::generated(Flavor::Directed, Cell::Blank, seed_config(sys.seed.clone()), Arc::new(gen));
    Ok(Compiled { system, represent: tile_represent(), provenance: Vec::new() })
}
