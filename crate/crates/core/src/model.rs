//! Shared transition-system interface and bounded breadth-first exploration.

use crate::lattice::Region;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("stale event {0}: reactants no longer match")]
    Stale(String),
    #[error("invalid turn: {0}")]
    InvalidTurn(String),
}

/// A labelled transition system restricted to a region.
pub trait Model: Sync {
    type Config: Clone + Eq + Hash + Ord + Debug + fmt::Display + Send + Sync;
    type Event: Clone + PartialEq + Debug + Display + Send + Sync;

    fn initial(&self) -> Self::Config;

    /// One-step successors, in a deterministic order. May include self-loops.
    fn successors(&self, cfg: &Self::Config, rg: &Region) -> Vec<(Self::Event, Self::Config)>;

    fn touches_boundary(&self, cfg: &Self::Config, rg: &Region) -> bool;

    fn apply(&self, cfg: &Self::Config, ev: &Self::Event, rg: &Region) -> Result<Self::Config, StepError> {
        self.successors(cfg, rg)
            .into_iter()
            .find(|(e, _)| e == ev)
            .map(|(_, c)| c)
            .ok_or_else(|| StepError::Stale(ev.to_string()))
    }

    /// Successors that differ from `cfg`.
    fn moves(&self, cfg: &Self::Config, rg: &Region) -> Vec<(Self::Event, Self::Config)> {
        let mut out = self.successors(cfg, rg);
        out.retain(|(_, c)| c != cfg);
        out
    }

    fn is_terminal(&self, cfg: &Self::Config, rg: &Region) -> bool {
        self.moves(cfg, rg).is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: usize,
    pub max_states: usize,
}

impl Limits {
    pub fn new(max_depth: usize, max_states: usize) -> Self {
        Limits { max_depth, max_states }
    }

    pub fn depth(max_depth: usize) -> Self {
        Limits { max_depth, max_states: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// Every reachable configuration inside the region was found.
    Exhausted,
    /// Configurations beyond the depth bound exist.
    DepthCut,
    /// The state budget ran out.
    Budget,
}

impl fmt::Display for Completion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Completion::Exhausted => "exhausted",
            Completion::DepthCut => "depth-cut",
            Completion::Budget => "state-budget",
        };
        f.write_str(s)
    }
}

/// Explicit reachability graph produced by [`explore`].
#[derive(Debug)]
pub struct StateGraph<C, E> {
    pub states: Vec<C>,
    pub index: HashMap<C, usize>,
    /// Distinct successors other than the state itself; `None` when not expanded.
    pub succ: Vec<Option<Vec<(E, usize)>>>,
    pub parent: Vec<Option<(usize, E)>>,
    pub depth: Vec<usize>,
    pub completion: Completion,
    pub boundary_tainted: bool,
}

impl<C: Clone + Eq + Hash, E: Clone> StateGraph<C, E> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn exact(&self) -> bool {
        self.completion == Completion::Exhausted
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn is_terminal(&self, i: usize) -> Option<bool> {
        self.succ[i].as_ref().map(|s| s.is_empty())
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_terminal(i) == Some(true)).collect()
    }

    /// Events leading from the initial configuration to state `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<E> {
        let mut evs = Vec::new();
        while let Some((p, e)) = &self.parent[i] {
            evs.push(e.clone());
            i = *p;
        }
        evs.reverse();
        evs
    }

    pub fn find(&self, c: &C) -> Option<usize> {
        self.index.get(c).copied()
    }
}

/// Breadth-first closure of the one-step relation inside `rg`.
///
/// Each layer is expanded in parallel and merged in frontier order, so the
/// result does not depend on the number of worker threads.
pub fn explore<M: Model>(model: &M, rg: &Region, limits: Limits) -> StateGraph<M::Config, M::Event> {
    explore_from(model, model.initial(), rg, limits)
}

pub fn explore_from<M: Model>(
    model: &M,
    start: M::Config,
    rg: &Region,
    limits: Limits,
) -> StateGraph<M::Config, M::Event> {
    let mut g = StateGraph {
        states: vec![start.clone()],
        index: HashMap::from([(start, 0)]),
        succ: vec![None],
        parent: vec![None],
        depth: vec![0],
        completion: Completion::Exhausted,
        boundary_tainted: false,
    };
    let mut frontier = vec![0usize];
    let mut depth = 0usize;
    while !frontier.is_empty() {
        let expanded: Vec<Vec<(M::Event, M::Config)>> =
            frontier.par_iter().map(|&i| model.moves(&g.states[i], rg)).collect();
        let tainted = frontier.iter().any(|&i| model.touches_boundary(&g.states[i], rg));
        g.boundary_tainted |= tainted;
        if depth >= limits.max_depth {
            let all_known = expanded.iter().flatten().all(|(_, c)| g.index.contains_key(c));
            if all_known {
                for (&i, moves) in frontier.iter().zip(expanded) {
                    g.succ[i] = Some(link(&g.index, moves));
                }
            } else {
                g.completion = Completion::DepthCut;
            }
            break;
        }
        let mut next = Vec::new();
        let mut out_of_budget = false;
        for (&i, moves) in frontier.iter().zip(expanded) {
            let mut edges = Vec::with_capacity(moves.len());
            for (ev, cfg) in moves {
                let j = match g.index.get(&cfg) {
                    Some(&j) => j,
                    None => {
                        if g.states.len() >= limits.max_states {
                            out_of_budget = true;
                            continue;
                        }
                        let j = g.states.len();
                        g.index.insert(cfg.clone(), j);
                        g.states.push(cfg);
                        g.succ.push(None);
                        g.parent.push(Some((i, ev.clone())));
                        g.depth.push(depth + 1);
                        next.push(j);
                        j
                    }
                };
                if !edges.iter().any(|(_, k)| *k == j) {
                    edges.push((ev, j));
                }
            }
            if out_of_budget {
                break;
            }
            g.succ[i] = Some(edges);
        }
        if out_of_budget {
            g.completion = Completion::Budget;
            break;
        }
        frontier = next;
        depth += 1;
    }
    g
}

fn link<C: Eq + Hash, E>(index: &HashMap<C, usize>, moves: Vec<(E, C)>) -> Vec<(E, usize)> {
    let mut edges: Vec<(E, usize)> = Vec::with_capacity(moves.len());
    for (ev, cfg) in moves {
        let j = index[&cfg];
        if !edges.iter().any(|(_, k)| *k == j) {
            edges.push((ev, j));
        }
    }
    edges
}

/// Uniform random walk over enabled events. Stops early at terminality.
pub fn random_trace<M: Model>(model: &M, rg: &Region, seed: u64, max_steps: usize) -> (Vec<M::Event>, M::Config) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = model.initial();
    let mut trace = Vec::new();
    for _ in 0..max_steps {
        let mut moves = model.successors(&cfg, rg);
        if moves.iter().all(|(_, c)| *c == cfg) {
            break;
        }
        let k = rng.random_range(0..moves.len());
        let (ev, next) = moves.swap_remove(k);
        trace.push(ev);
        cfg = next;
    }
    (trace, cfg)
}

/// Replays a trace from the initial configuration.
pub fn replay<M: Model>(model: &M, rg: &Region, events: &[M::Event]) -> Result<Vec<M::Config>, StepError> {
    let mut cfg = model.initial();
    let mut seen = vec![cfg.clone()];
    for ev in events {
        cfg = model.apply(&cfg, ev, rg)?;
        seen.push(cfg.clone());
    }
    Ok(seen)
}

/// Runs `f` on a pool sized by `WORKBENCH_THREADS` when set.
pub fn with_worker_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let n = threads.or_else(|| std::env::var("WORKBENCH_THREADS").ok().and_then(|v| v.parse().ok()));
    match n {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}
