//! Nondeterministic fully asynchronous cellular automata on the von Neumann neighborhood.

use crate::config::Configuration;
use crate::lattice::{Coord, LatticeKind, Region};
use crate::model::Model;
use crate::scrn::Species;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaError {
    #[error("rule {0} has no outcomes")]
    NoOutcomes(usize),
    #[error("the quiescent neighborhood does not map to itself (rule {0})")]
    QuiescentUnstable(usize),
    #[error("stale choice at {0}")]
    StaleChoice(Coord),
}

/// One position of a neighborhood pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pat<S> {
    Any,
    Is(S),
    OneOf(BTreeSet<S>),
}

impl<S: Ord> Pat<S> {
    pub fn matches(&self, s: &S) -> bool {
        match self {
            Pat::Any => true,
            Pat::Is(t) => t == s,
            Pat::OneOf(set) => set.contains(s),
        }
    }
}

impl<S: fmt::Display> fmt::Display for Pat<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pat::Any => f.write_str("*"),
            Pat::Is(s) => write!(f, "{s}"),
            Pat::OneOf(set) => {
                f.write_str("{")?;
                for (i, s) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Pattern over (center, N, E, S, W) and the states the center may become.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CaRule<S> {
    pub pattern: [Pat<S>; 5],
    pub outcomes: BTreeSet<S>,
}

impl<S: Ord> CaRule<S> {
    pub fn new(pattern: [Pat<S>; 5], outcomes: impl IntoIterator<Item = S>) -> Self {
        CaRule { pattern, outcomes: outcomes.into_iter().collect() }
    }

    pub fn matches(&self, hood: &[&S; 5]) -> bool {
        self.pattern.iter().zip(hood.iter()).all(|(p, s)| p.matches(s))
    }
}

#[derive(Clone, Debug)]
pub struct CaSystem<S: Species> {
    pub states: Vec<S>,
    pub quiescent: S,
    pub rules: Vec<CaRule<S>>,
    pub initial: Configuration<S>,
    by_center: HashMap<S, Vec<usize>>,
    open_center: Vec<usize>,
}

impl<S: Species> CaSystem<S> {
    pub fn new(states: Vec<S>, quiescent: S, rules: Vec<CaRule<S>>, initial: Configuration<S>) -> Result<Self, CaError> {
        let mut by_center: HashMap<S, Vec<usize>> = HashMap::new();
        let mut open_center = Vec::new();
        for (i, r) in rules.iter().enumerate() {
            if r.outcomes.is_empty() {
                return Err(CaError::NoOutcomes(i));
            }
            match &r.pattern[0] {
                Pat::Is(s) => by_center.entry(s.clone()).or_default().push(i),
                Pat::OneOf(set) => {
                    for s in set {
                        by_center.entry(s.clone()).or_default().push(i);
                    }
                }
                Pat::Any => open_center.push(i),
            }
        }
        let sys = CaSystem { states, quiescent, rules, initial, by_center, open_center };
        let q = &sys.quiescent;
        let hood = [q, q, q, q, q];
        for i in sys.matching(&hood) {
            if sys.rules[i].outcomes.iter().any(|s| s != q) {
                return Err(CaError::QuiescentUnstable(i));
            }
        }
        Ok(sys)
    }

    fn matching(&self, hood: &[&S; 5]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .by_center
            .get(hood[0])
            .into_iter()
            .flatten()
            .chain(self.open_center.iter())
            .copied()
            .filter(|&i| self.rules[i].matches(hood))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn neighborhood<'a>(cfg: &'a Configuration<S>, cell: Coord) -> [&'a S; 5] {
        let k = LatticeKind::Square4;
        [cfg.get(cell), cfg.get(k.step(cell, 0)), cfg.get(k.step(cell, 1)), cfg.get(k.step(cell, 2)), cfg.get(k.step(cell, 3))]
    }

    /// Union of matching outcomes; the current state alone when nothing matches.
    pub fn local_outcomes(&self, cfg: &Configuration<S>, cell: Coord) -> BTreeSet<S> {
        self.outcomes_for(&Self::neighborhood(cfg, cell))
    }

    /// Local function on an explicit (center, N, E, S, W) neighborhood.
    pub fn outcomes_for(&self, hood: &[&S; 5]) -> BTreeSet<S> {
        let mut out = BTreeSet::new();
        for i in self.matching(hood) {
            out.extend(self.rules[i].outcomes.iter().cloned());
        }
        if out.is_empty() {
            out.insert(hood[0].clone());
        }
        out
    }

    fn candidate_cells(&self, cfg: &Configuration<S>, rg: &Region) -> Vec<Coord> {
        let mut set = BTreeSet::new();
        for c in cfg.support() {
            set.insert(c);
            for n in LatticeKind::Square4.neighbors(c) {
                set.insert(n);
            }
        }
        set.into_iter().filter(|c| rg.contains(*c)).collect()
    }

    /// Successors that rewrite one cell to a different state.
    pub fn steps(&self, cfg: &Configuration<S>, rg: &Region) -> Vec<(CaEvent, Configuration<S>)> {
        let mut out = Vec::new();
        for cell in self.candidate_cells(cfg, rg) {
            let cur = cfg.get(cell);
            for (k, s) in self.local_outcomes(cfg, cell).into_iter().enumerate() {
                if &s != cur {
                    out.push((CaEvent { cell, choice: k }, cfg.clone().with(cell, s)));
                }
            }
        }
        out
    }

    pub fn step(&self, cfg: &Configuration<S>, cell: Coord, chosen: &S) -> Result<Configuration<S>, CaError> {
        if !self.local_outcomes(cfg, cell).contains(chosen) {
            return Err(CaError::StaleChoice(cell));
        }
        Ok(cfg.clone().with(cell, chosen.clone()))
    }

    pub fn is_fixed_point(&self, cfg: &Configuration<S>, rg: &Region) -> bool {
        self.candidate_cells(cfg, rg).into_iter().all(|c| {
            let out = self.local_outcomes(cfg, c);
            out.len() == 1 && out.contains(cfg.get(c))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaEvent {
    pub cell: Coord,
    /// Index into the sorted outcome set.
    pub choice: usize,
}

impl fmt::Display for CaEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule={} at={} dir=-", self.choice, self.cell)
    }
}

impl<S: Species> Model for CaSystem<S> {
    type Config = Configuration<S>;
    type Event = CaEvent;

    fn initial(&self) -> Configuration<S> {
        self.initial.clone()
    }

    fn successors(&self, cfg: &Configuration<S>, rg: &Region) -> Vec<(CaEvent, Configuration<S>)> {
        self.steps(cfg, rg)
    }

    fn touches_boundary(&self, cfg: &Configuration<S>, rg: &Region) -> bool {
        cfg.touches_boundary(rg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{explore, Limits};
    use crate::scrn::{nm, Name};

    fn is(s: &str) -> Pat<Name> {
        Pat::Is(nm(s))
    }

    fn line(states: &[&str]) -> Configuration<Name> {
        Configuration::from_cells(nm("q"), LatticeKind::Square4, states.iter().enumerate().map(|(i, s)| (Coord::new(i as i32 - 1, 0), nm(s))))
    }

    #[test]
    fn outcomes_default_to_identity_and_union() {
        let rules = vec![
            CaRule::new([is("A"), Pat::Any, Pat::Any, Pat::Any, Pat::Any], [nm("B"), nm("C")]),
            CaRule::new([is("A"), Pat::Any, is("q"), Pat::Any, Pat::Any], [nm("D")]),
        ];
        let cfg = line(&["A"]);
        let sys = CaSystem::new(vec![], nm("q"), rules, cfg.clone()).unwrap();
        let out = sys.local_outcomes(&cfg, Coord::new(-1, 0));
        assert_eq!(out, ["B", "C", "D"].map(nm).into_iter().collect());
        assert_eq!(sys.local_outcomes(&cfg, Coord::new(5, 5)), [nm("q")].into_iter().collect());
        assert!(!sys.is_fixed_point(&cfg, &Region::new(2)));
    }

    #[test]
    fn unstable_quiescent_rejected() {
        let rules = vec![CaRule::new([Pat::Any, Pat::Any, Pat::Any, Pat::Any, Pat::Any], [nm("A")])];
        assert!(matches!(
            CaSystem::new(vec![], nm("q"), rules, line(&[])),
            Err(CaError::QuiescentUnstable(0))
        ));
    }

    #[test]
    fn line_successors_match_oracle() {
        // A with an A to its east becomes B
        let rules = vec![CaRule::new([is("A"), Pat::Any, is("A"), Pat::Any, Pat::Any], [nm("B")])];
        let cfg = line(&["A", "A", "A"]);
        let sys = CaSystem::new(vec![], nm("q"), rules, cfg.clone()).unwrap();
        let succ: Vec<Coord> = sys.steps(&cfg, &Region::new(2)).into_iter().map(|(e, _)| e.cell).collect();
        // oracle: every A whose east neighbor is A
        let oracle: Vec<Coord> = (0..3)
            .filter(|&i| i + 1 < 3)
            .map(|i| Coord::new(i - 1, 0))
            .collect();
        assert_eq!(succ, oracle);
        let g = explore(&sys, &Region::new(2), Limits::depth(10));
        assert!(g.exact());
        for t in g.terminals() {
            assert!(sys.is_fixed_point(&g.states[t], &Region::new(2)));
        }
        assert!(sys.step(&cfg, Coord::new(1, 0), &nm("B")).is_err());
    }
}
