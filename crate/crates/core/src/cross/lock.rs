//! Asynchronous CA as directed surface CRNs: each cell locks and records its
//! neighbors before applying the local function, then releases them.

use crate::ca::CaSystem;
use crate::compile::Compiled;
use crate::config::Configuration;
use crate::lattice::{LatticeKind, Region};
use crate::scrn::{Flavor, Name, RuleGen, ScrnSystem};
use std::fmt;
use std::sync::Arc;

pub const GENERATOR: &str = "ca-lock";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lock {
    Free,
    /// This cell locks the neighbor.
    Holding,
    /// The neighbor locks this cell.
    Held,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LockMutation {
    None,
    /// The local function reads the recorded neighbors one quarter turn off.
    RotatedNeighborhood,
}

/// (state, recorded neighbors, locks, release bit, pause bit)
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LockCell {
    pub sigma: Name,
    pub seen: [Option<Name>; 4],
    pub locks: [Lock; 4],
    pub release: bool,
    pub pause: bool,
}

impl LockCell {
    pub fn fresh(sigma: Name) -> Self {
        LockCell { sigma, seen: [None, None, None, None], locks: [Lock::Free; 4], release: false, pause: false }
    }

    fn recorded(&self) -> Option<[&Name; 4]> {
        let [n, e, s, w] = &self.seen;
        Some([n.as_ref()?, e.as_ref()?, s.as_ref()?, w.as_ref()?])
    }

    fn free(&self) -> bool {
        self.locks.iter().all(|l| *l == Lock::Free)
    }
}

impl fmt::Display for LockCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == LockCell::fresh(self.sigma.clone()) {
            return write!(f, "{}", self.sigma);
        }
        write!(f, "{}[", self.sigma)?;
        for (i, s) in self.seen.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match s {
                Some(s) => write!(f, "{s}")?,
                None => f.write_str("_")?,
            }
        }
        f.write_str("|")?;
        for l in &self.locks {
            f.write_str(match l {
                Lock::Free => ".",
                Lock::Holding => "1",
                Lock::Held => "0",
            })?;
        }
        write!(f, "|{}{}]", self.release as u8, self.pause as u8)
    }
}

pub type LockCompiled = Compiled<ScrnSystem<LockCell>, LockCell, Name>;

pub struct LockRules {
    ca: CaSystem<Name>,
    mutation: LockMutation,
}

fn opp(d: u8) -> u8 {
    LatticeKind::Square4.opposite(d)
}

impl LockRules {
    fn apply(&self, a: &LockCell, seen: [&Name; 4]) -> std::collections::BTreeSet<Name> {
        let [n, e, s, w] = seen;
        let hood = match self.mutation {
            LockMutation::None => [&a.sigma, n, e, s, w],
            LockMutation::RotatedNeighborhood => [&a.sigma, w, n, e, s],
        };
        self.ca.outcomes_for(&hood)
    }
}

impl RuleGen<LockCell> for LockRules {
    fn name(&self) -> &str {
        GENERATOR
    }

    fn uni(&self, a: &LockCell, out: &mut Vec<LockCell>) {
        let Some(seen) = a.recorded() else { return };
        if !a.release && !a.pause && a.locks.iter().all(|l| *l == Lock::Holding) {
            let next = self.apply(a, seen);
            for s in &next {
                if *s != a.sigma {
                    out.push(LockCell { sigma: s.clone(), release: true, ..a.clone() });
                }
            }
            if next.len() == 1 && next.contains(&a.sigma) {
                out.push(LockCell { release: true, pause: true, ..a.clone() });
            }
        }
        if a.release && a.free() {
            out.push(LockCell { release: false, ..a.clone() });
        }
    }

    fn bi(&self, a: &LockCell, b: &LockCell, dir: u8, out: &mut Vec<(LockCell, LockCell)>) {
        let d = dir as usize;
        let od = opp(dir) as usize;
        if b.release {
            return;
        }
        let (ka, kb) = (a.locks[d], b.locks[od]);
        // lock and record
        if !a.release
            && !a.pause
            && ka == Lock::Free
            && kb == Lock::Free
            && a.locks.iter().all(|l| *l != Lock::Held)
        {
            let mut x = a.clone();
            let mut y = b.clone();
            x.seen[d] = Some(b.sigma.clone());
            x.locks[d] = Lock::Holding;
            y.seen[od] = Some(a.sigma.clone());
            y.locks[od] = Lock::Held;
            out.push((x, y));
        }
        // unlock, before the transition or while releasing
        if ka == Lock::Holding && kb == Lock::Held && !(a.pause && !a.release) {
            let mut x = a.clone();
            let mut y = b.clone();
            x.locks[d] = Lock::Free;
            y.locks[od] = Lock::Free;
            out.push((x, y));
        }
        // a paused cell notices a changed neighbor
        if !a.release
            && a.pause
            && ka == Lock::Free
            && kb == Lock::Free
            && a.recorded().is_some()
            && a.seen[d].as_ref() != Some(&b.sigma)
        {
            let mut x = a.clone();
            let mut y = b.clone();
            x.seen[d] = Some(b.sigma.clone());
            x.pause = false;
            y.seen[od] = Some(a.sigma.clone());
            out.push((x, y));
        }
    }

    fn blank_active(&self) -> bool {
        true
    }
}

pub fn represent(c: &LockCell) -> Option<Name> {
    Some(c.sigma.clone())
}

pub fn compile(ca: &CaSystem<Name>) -> LockCompiled {
    compile_with(ca, LockMutation::None)
}

pub fn compile_with(ca: &CaSystem<Name>, mutation: LockMutation) -> LockCompiled {
    let blank = LockCell::fresh(ca.quiescent.clone());
    let initial =
        Configuration::from_cells(blank.clone(), LatticeKind::Square4, ca.initial.iter().map(|(c, s)| (c, LockCell::fresh(s.clone()))));
    let rules = Arc::new(LockRules { ca: ca.clone(), mutation });
    let system = ScrnSystem::generated(Flavor::Directed, blank, initial, rules);
    Compiled { system, represent: Arc::new(represent), provenance: Vec::new() }
}

/// Every cell of `rg` that the local function leaves alone is paused with
/// accurate records; the others are fresh.
pub fn settled(ca: &CaSystem<Name>, cfg: &Configuration<Name>, rg: &Region) -> Configuration<LockCell> {
    let mut out = Configuration::empty(LockCell::fresh(ca.quiescent.clone()), LatticeKind::Square4);
    for c in rg.cells() {
        let hood = CaSystem::neighborhood(cfg, c);
        let [sigma, n, e, s, w] = hood;
        let mut cell = LockCell::fresh(sigma.clone());
        let next = ca.outcomes_for(&hood);
        if next.len() == 1 && next.contains(sigma) {
            cell.seen = [Some(n.clone()), Some(e.clone()), Some(s.clone()), Some(w.clone())];
            cell.pause = true;
        }
        out.set(c, cell);
    }
    out
}

/// Lock vectors agree across every edge inside `rg`.
pub fn locks_consistent(cfg: &Configuration<LockCell>, rg: &Region) -> bool {
    let lat = LatticeKind::Square4;
    rg.cells().all(|c| {
        (0..4u8).all(|d| {
            let n = lat.step(c, d);
            if !rg.contains(n) {
                return cfg.get(c).locks[d as usize] == Lock::Free;
            }
            let (x, y) = (cfg.get(c).locks[d as usize], cfg.get(n).locks[opp(d) as usize]);
            matches!((x, y), (Lock::Free, Lock::Free) | (Lock::Holding, Lock::Held) | (Lock::Held, Lock::Holding))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{CaRule, Pat};
    use crate::lattice::{Coord, N};
    use crate::model::{Limits, Model};
    use crate::scrn::nm;
    use crate::verify::{check_follows, Setup};

    /// A turns into C with B to its north and into B with B to its east.
    fn toy() -> CaSystem<Name> {
        let is = |s: &str| Pat::Is(nm(s));
        let rules = vec![
            CaRule::new([is("A"), is("B"), Pat::Any, Pat::Any, Pat::Any], [nm("C")]),
            CaRule::new([is("A"), Pat::Any, is("B"), Pat::Any, Pat::Any], [nm("B")]),
        ];
        let init = Configuration::from_cells(nm("q"), LatticeKind::Square4, [(Coord::ORIGIN, nm("A")), (Coord::new(0, 1), nm("B"))]);
        CaSystem::new(["q", "A", "B", "C"].map(nm).to_vec(), nm("q"), rules, init).unwrap()
    }

    fn project(c: &Configuration<LockCell>) -> Option<Configuration<Name>> {
        c.try_map(nm("q"), represent)
    }

    #[test]
    fn lock_then_unlock_restores_pair() {
        let comp = compile(&toy());
        let rules = LockRules { ca: toy(), mutation: LockMutation::None };
        let a = LockCell::fresh(nm("A"));
        let b = LockCell::fresh(nm("B"));
        let mut out = Vec::new();
        rules.bi(&a, &b, N, &mut out);
        assert_eq!(out.len(), 1);
        let (x, y) = out.pop().unwrap();
        rules.bi(&x, &y, N, &mut out);
        let (x2, y2) = out.into_iter().find(|(x2, _)| x2.locks[0] == Lock::Free).unwrap();
        assert_eq!((x2.locks, y2.locks), (a.locks, b.locks));
        assert_eq!(x2.seen[0], Some(nm("B")));
        assert!(comp.provenance.is_empty());
    }

    #[test]
    fn identity_outcome_pauses() {
        let rules = LockRules { ca: toy(), mutation: LockMutation::None };
        let mut a = LockCell::fresh(nm("A"));
        a.seen = [Some(nm("q")), Some(nm("q")), Some(nm("q")), Some(nm("q"))];
        a.locks = [Lock::Holding; 4];
        let mut out = Vec::new();
        rules.uni(&a, &mut out);
        assert_eq!(out, vec![LockCell { release: true, pause: true, ..a.clone() }]);
        a.seen[0] = Some(nm("B"));
        out.clear();
        rules.uni(&a, &mut out);
        assert_eq!(out, vec![LockCell { sigma: nm("C"), release: true, ..a }]);
    }

    #[test]
    fn compiled_toy_follows() {
        let ca = toy();
        let comp = compile(&ca);
        let rg = Region::new(1);
        let start = settled(&ca, &ca.initial, &rg);
        let setup = Setup::new(&comp.system, &ca, &project, rg, 10).starting_at(start.clone(), None);
        let r = check_follows(&setup);
        assert!(r.verdict.is_pass(), "{r}");
        let g = crate::model::explore_from(&comp.system, start, &rg, Limits::depth(10));
        assert!(g.states.iter().all(|c| locks_consistent(c, &rg)));
    }

    #[test]
    fn rotated_neighborhood_is_caught() {
        let ca = toy();
        let comp = compile_with(&ca, LockMutation::RotatedNeighborhood);
        let rg = Region::new(1);
        let setup = Setup::new(&comp.system, &ca, &project, rg, 10).starting_at(settled(&ca, &ca.initial, &rg), None);
        assert!(check_follows(&setup).verdict.is_fail());
    }

    #[test]
    fn settled_is_terminal_iff_fixed_point() {
        let ca = toy();
        let rg = Region::new(1);
        let comp = compile(&ca);
        let fixed = Configuration::from_cells(nm("q"), LatticeKind::Square4, [(Coord::ORIGIN, nm("C")), (Coord::new(0, 1), nm("B"))]);
        for cfg in [ca.initial.clone(), fixed] {
            let s = settled(&ca, &cfg, &rg);
            let terminal = comp.system.successors(&s, &rg).is_empty();
            assert_eq!(terminal, ca.is_fixed_point(&cfg, &rg), "{cfg}");
        }
    }
}
