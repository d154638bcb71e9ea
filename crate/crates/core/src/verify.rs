//! Bounded refinement checks between a simulating system and the system it simulates.
//!
//! The simulating system (`sim`) is projected onto the simulated one (`src`)
//! configuration by configuration; `None` is the undefined image.

use crate::config::Configuration;
use crate::lattice::{LatticeKind, Region};
use crate::model::{explore_from, random_trace, Completion, Limits, Model, StateGraph};
use crate::por::terminal_candidates;
use crate::scrn::{Event, ScrnSystem, Species};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<E> {
    Pass,
    /// Events from the simulating system's initial configuration to the witness.
    Fail { trace: Vec<E>, reason: String },
    Indeterminate(String),
}

impl<E> Verdict<E> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// 0 pass, 1 fail, 2 indeterminate.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail { .. } => 1,
            Verdict::Indeterminate(_) => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report<E> {
    pub check: &'static str,
    pub verdict: Verdict<E>,
    pub states: usize,
    pub depth: usize,
    /// The simulating search stopped at its depth bound.
    pub bounded: bool,
    pub boundary: bool,
    /// Number of individual obligations discharged.
    pub obligations: usize,
}

impl<E: fmt::Display> fmt::Display for Report<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match &self.verdict {
            Verdict::Pass => "pass".to_string(),
            Verdict::Fail { reason, .. } => format!("fail: {reason}"),
            Verdict::Indeterminate(why) => format!("indeterminate: {why}"),
        };
        writeln!(f, "check {}: {v}", self.check)?;
        writeln!(
            f,
            "states={} depth={} bounded={} boundary={} obligations={}",
            self.states, self.depth, self.bounded, self.boundary, self.obligations
        )?;
        if let Verdict::Fail { trace, .. } = &self.verdict {
            writeln!(f, "counterexample ({} steps):", trace.len())?;
            for (i, e) in trace.iter().enumerate() {
                writeln!(f, "step={i} {e}")?;
            }
        }
        Ok(())
    }
}

pub type Project<'a, A, B> = &'a (dyn Fn(&A) -> Option<B> + Sync);
pub type Images<'a, B> = &'a (dyn Fn(&B) -> Vec<B> + Sync);

/// The pair of systems under comparison and the search bounds.
pub struct Setup<'a, T: Model, S: Model> {
    pub sim: &'a T,
    pub src: &'a S,
    pub project: Project<'a, T::Config, S::Config>,
    pub rg: Region,
    pub sim_limits: Limits,
    pub src_limits: Limits,
    /// Images of a source configuration under the lattice symmetries when the
    /// simulation only holds up to rotation and reflection.
    pub symmetric: Option<Images<'a, S::Config>>,
    /// Start configurations replacing the initial ones.
    pub sim_start: Option<T::Config>,
    pub src_start: Option<S::Config>,
}

impl<'a, T: Model, S: Model> Setup<'a, T, S> {
    pub fn new(sim: &'a T, src: &'a S, project: Project<'a, T::Config, S::Config>, rg: Region, depth: usize) -> Self {
        Setup { sim, src, project, rg, sim_limits: Limits::depth(depth), src_limits: Limits::depth(depth.max(1)), symmetric: None, sim_start: None, src_start: None }
    }

    pub fn with_symmetry(mut self, f: Images<'a, S::Config>) -> Self {
        self.symmetric = Some(f);
        self
    }

    pub fn with_src_limits(mut self, l: Limits) -> Self {
        self.src_limits = l;
        self
    }

    pub fn with_sim_limits(mut self, l: Limits) -> Self {
        self.sim_limits = l;
        self
    }

    pub fn starting_at(mut self, sim: T::Config, src: Option<S::Config>) -> Self {
        self.src_start = src.or_else(|| (self.project)(&sim));
        self.sim_start = Some(sim);
        self
    }

    fn sim_graph(&self) -> StateGraph<T::Config, T::Event> {
        let start = self.sim_start.clone().unwrap_or_else(|| self.sim.initial());
        explore_from(self.sim, start, &self.rg, self.sim_limits)
    }

    fn src_graph(&self) -> StateGraph<S::Config, S::Event> {
        let start = self.src_start.clone().unwrap_or_else(|| self.src.initial());
        explore_from(self.src, start, &self.rg, self.src_limits)
    }

    fn sym_images(&self, c: &S::Config) -> Vec<S::Config> {
        match self.symmetric {
            Some(f) => f(c),
            None => vec![c.clone()],
        }
    }
}

/// Symmetry images of a lattice configuration, identity first.
pub fn lattice_images<X: Clone + Eq + Ord>(kind: LatticeKind) -> impl Fn(&Configuration<X>) -> Vec<Configuration<X>> + Sync {
    move |c: &Configuration<X>| kind.symmetries().iter().map(|g| c.transformed(g)).collect()
}

/// Cell-wise representation; undefined when any cell is undefined.
pub fn map_config<A: Clone + Eq, B: Clone + Eq>(cfg: &Configuration<A>, blank: B, r: impl Fn(&A) -> Option<B>) -> Option<Configuration<B>> {
    cfg.try_map(blank, r)
}

/// Memoized reachability in the simulated system.
struct Reach<S: Model> {
    cache: HashMap<S::Config, (HashSet<S::Config>, bool)>,
}

impl<S: Model> Reach<S> {
    fn new() -> Self {
        Reach { cache: HashMap::new() }
    }

    /// Some(true) reachable, Some(false) unreachable, None unknown within the budget.
    fn query(&mut self, src: &S, rg: &Region, limits: Limits, a: &S::Config, b: &S::Config) -> Option<bool> {
        if a == b {
            return Some(true);
        }
        let entry = self.cache.entry(a.clone()).or_insert_with(|| {
            let g = explore_from(src, a.clone(), rg, limits);
            let exact = g.exact();
            (g.states.into_iter().collect(), exact)
        });
        if entry.0.contains(b) {
            Some(true)
        } else if entry.1 {
            Some(false)
        } else {
            None
        }
    }
}

fn images<T: Model, S: Model>(setup: &Setup<'_, T, S>, g: &StateGraph<T::Config, T::Event>) -> Vec<Option<S::Config>> {
    use rayon::prelude::*;
    g.states.par_iter().map(|c| (setup.project)(c)).collect()
}

/// Every simulating step projects to a (possibly empty) run of the simulated system.
///
/// Steps through undefined images are stitched: from each configuration with a
/// defined image, every next defined image reached through undefined ones must
/// be reachable in the simulated system.
pub fn check_follows<T: Model, S: Model>(setup: &Setup<'_, T, S>) -> Report<T::Event> {
    let g = setup.sim_graph();
    let img = images(setup, &g);
    let mut report = base_report("follows", &g);
    if setup.sim_limits.max_depth == 0 {
        report.verdict = Verdict::Indeterminate("depth 0".into());
        return report;
    }
    let mut reach = Reach::<S>::new();
    let mut unknown = None;
    for i in 0..g.len() {
        let Some(a) = &img[i] else { continue };
        // next defined images through undefined intermediates
        let mut seen = HashSet::from([i]);
        let mut queue = VecDeque::from([(i, Vec::new())]);
        while let Some((k, path)) = queue.pop_front() {
            let Some(edges) = &g.succ[k] else { continue };
            for (ev, j) in edges {
                if !seen.insert(*j) {
                    continue;
                }
                let mut p: Vec<T::Event> = path.clone();
                p.push(ev.clone());
                match &img[*j] {
                    None => queue.push_back((*j, p)),
                    Some(b) => {
                        if a == b {
                            continue;
                        }
                        report.obligations += 1;
                        let mut answer = Some(false);
                        for (ga, gb) in setup.sym_images(a).iter().zip(setup.sym_images(b).iter()) {
                            match reach.query(setup.src, &setup.rg, setup.src_limits, ga, gb) {
                                Some(true) => {
                                    answer = Some(true);
                                    break;
                                }
                                None => answer = None,
                                Some(false) => {}
                            }
                        }
                        match answer {
                            Some(true) => {}
                            Some(false) => {
                                let mut trace = g.path_to(i);
                                trace.extend(p);
                                report.verdict = Verdict::Fail {
                                    trace,
                                    reason: format!("image {b} is not reachable from {a}"),
                                };
                                return report;
                            }
                            None => {
                                unknown.get_or_insert_with(|| format!("reachability of {b} from {a} exceeds the source budget"));
                            }
                        }
                    }
                }
            }
        }
    }
    report.verdict = finish(&g, unknown);
    report
}

fn base_report<C, E>(check: &'static str, g: &StateGraph<C, E>) -> Report<E> {
    Report {
        check,
        verdict: Verdict::Pass,
        states: g.states.len(),
        depth: g.depth.iter().copied().max().unwrap_or(0),
        bounded: g.completion == Completion::DepthCut,
        boundary: g.boundary_tainted,
        obligations: 0,
    }
}

fn finish<C, E>(g: &StateGraph<C, E>, unknown: Option<String>) -> Verdict<E> {
    if let Some(why) = unknown {
        return Verdict::Indeterminate(why);
    }
    if g.completion == Completion::Budget {
        return Verdict::Indeterminate("state budget exhausted".into());
    }
    Verdict::Pass
}

/// Indices reaching any node satisfying `target`, over the explored graph.
fn backward_closure<C, E>(g: &StateGraph<C, E>, rev: &[Vec<usize>], target: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut mark = vec![false; g.states.len()];
    let mut stack = Vec::new();
    for (i, m) in mark.iter_mut().enumerate() {
        if target(i) {
            *m = true;
            stack.push(i);
        }
    }
    while let Some(k) = stack.pop() {
        for &p in &rev[k] {
            if !mark[p] {
                mark[p] = true;
                stack.push(p);
            }
        }
    }
    mark
}

fn reverse<C, E>(g: &StateGraph<C, E>) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); g.states.len()];
    for (i, s) in g.succ.iter().enumerate() {
        for (_, j) in s.iter().flatten() {
            rev[*j].push(i);
        }
    }
    rev
}

/// Every one-step successor of a simulated configuration is reachable, under
/// the projection, from every simulating configuration that represents it.
///
/// The witness set for a simulated configuration is its whole reachable
/// preimage, which makes the second condition hold by reflexivity.
pub fn check_models<T: Model, S: Model>(setup: &Setup<'_, T, S>) -> Report<T::Event> {
    let g = setup.sim_graph();
    let img = images(setup, &g);
    let mut report = base_report("models", &g);
    if setup.sim_limits.max_depth == 0 {
        report.verdict = Verdict::Indeterminate("depth 0".into());
        return report;
    }
    let rev = reverse(&g);
    let open = backward_closure(&g, &rev, |i| g.succ[i].is_none());
    let mut preimage: HashMap<&S::Config, Vec<usize>> = HashMap::new();
    for (i, a) in img.iter().enumerate() {
        if let Some(a) = a {
            preimage.entry(a).or_default().push(i);
        }
    }
    let mut keys: Vec<&S::Config> = preimage.keys().copied().collect();
    keys.sort();
    let mut unknown = None;
    let mut closures: HashMap<(usize, S::Config), Vec<bool>> = HashMap::new();
    let transformed: Vec<Option<Vec<S::Config>>> = img.iter().map(|a| a.as_ref().map(|a| setup.sym_images(a))).collect();
    for a in keys {
        let pi = &preimage[a];
        let variants = setup.sym_images(a);
        // per symmetry index, the simulated successors of the transformed image
        let succs: Vec<Vec<S::Config>> = variants
            .iter()
            .map(|v| setup.src.moves(v, &setup.rg).into_iter().map(|(_, c)| c).collect())
            .collect();
        for &ap in pi {
            let mut ok_any = false;
            let mut failure: Option<String> = None;
            for (k, betas) in succs.iter().enumerate() {
                let mut all = true;
                for beta in betas {
                    report.obligations += 1;
                    let mark = closures.entry((k, beta.clone())).or_insert_with(|| {
                        backward_closure(&g, &rev, |i| transformed[i].as_ref().is_some_and(|x| x[k] == *beta))
                    });
                    if mark[ap] {
                        continue;
                    }
                    if open[ap] {
                        match stitch(setup, &g.states[ap], k, beta) {
                            Some(true) => continue,
                            Some(false) => {}
                            None => {
                                unknown.get_or_insert_with(|| format!("stitching to {beta} exceeds the budget"));
                                continue;
                            }
                        }
                    }
                    all = false;
                    failure.get_or_insert_with(|| format!("no run from a representative of {a} reaches {beta}"));
                    break;
                }
                if all {
                    ok_any = true;
                    break;
                }
            }
            if !ok_any {
                report.verdict = Verdict::Fail { trace: g.path_to(ap), reason: failure.unwrap_or_default() };
                return report;
            }
        }
    }
    report.verdict = finish(&g, unknown);
    report
}

fn sym_at<T: Model, S: Model>(setup: &Setup<'_, T, S>, x: &S::Config, k: usize) -> S::Config {
    if k == 0 {
        x.clone()
    } else {
        setup.sym_images(x).swap_remove(k)
    }
}

/// Fresh bounded search from a simulating configuration for an image.
fn stitch<T: Model, S: Model>(setup: &Setup<'_, T, S>, from: &T::Config, k: usize, beta: &S::Config) -> Option<bool> {
    let g = explore_from(setup.sim, from.clone(), &setup.rg, setup.sim_limits);
    let hit = g.states.iter().any(|c| (setup.project)(c).is_some_and(|x| sym_at(setup, &x, k) == *beta));
    if hit {
        Some(true)
    } else if g.exact() {
        Some(false)
    } else {
        None
    }
}

/// Reachable images match the simulated reachable set, and terminal images
/// match the simulated terminal set.
pub fn check_equiv<T: Model, S: Model>(setup: &Setup<'_, T, S>, canon: Option<&(dyn Fn(&S::Config) -> S::Config + Sync)>) -> Report<T::Event> {
    let g = setup.sim_graph();
    let img = images(setup, &g);
    let mut report = base_report("equiv", &g);
    if setup.sim_limits.max_depth == 0 {
        report.verdict = Verdict::Indeterminate("depth 0".into());
        return report;
    }
    let key = |c: &S::Config| match canon {
        Some(f) => f(c),
        None => c.clone(),
    };
    let h = setup.src_graph();
    let src_set: HashSet<S::Config> = h.states.iter().map(&key).collect();
    let mut seen_images = HashSet::new();
    for (i, a) in img.iter().enumerate() {
        let Some(a) = a else { continue };
        report.obligations += 1;
        let ka = key(a);
        if !src_set.contains(&ka) {
            if h.exact() {
                report.verdict = Verdict::Fail { trace: g.path_to(i), reason: format!("image {a} is not reachable in the simulated system") };
                return report;
            }
            report.verdict = Verdict::Indeterminate(format!("image {a} lies beyond the simulated search bound"));
            return report;
        }
        seen_images.insert(ka);
    }
    if g.exact() {
        for (k, s) in h.states.iter().enumerate() {
            if !seen_images.contains(&key(s)) {
                report.verdict = Verdict::Fail {
                    trace: Vec::new(),
                    reason: format!("simulated configuration {s} (depth {}) has no representative", h.depth[k]),
                };
                return report;
            }
        }
    }
    if g.exact() && h.exact() {
        let sim_term: Result<HashSet<S::Config>, usize> = g
            .terminals()
            .into_iter()
            .map(|i| img[i].as_ref().map(&key).ok_or(i))
            .collect();
        let sim_term = match sim_term {
            Ok(s) => s,
            Err(i) => {
                report.verdict = Verdict::Fail { trace: g.path_to(i), reason: "terminal configuration with undefined image".into() };
                return report;
            }
        };
        let src_term: HashSet<S::Config> = h.terminals().into_iter().map(|i| key(&h.states[i])).collect();
        if sim_term != src_term {
            let extra = sim_term.difference(&src_term).next().map(|c| format!("extra terminal image {c}"));
            let missing = src_term.difference(&sim_term).next().map(|c| format!("missing terminal image {c}"));
            let trace = g
                .terminals()
                .into_iter()
                .find(|&i| img[i].as_ref().is_some_and(|a| !src_term.contains(&key(a))))
                .map(|i| g.path_to(i))
                .unwrap_or_default();
            report.verdict = Verdict::Fail { trace, reason: extra.or(missing).unwrap_or_default() };
            return report;
        }
    }
    report.verdict = finish(&g, None);
    if report.verdict.is_pass() && !h.exact() && h.completion == Completion::Budget {
        report.verdict = Verdict::Indeterminate("simulated state budget exhausted".into());
    }
    report
}

/// Compares two terminal sets after projection.
pub fn terminal_images_equal<A, B: Eq + Hash + Clone>(sim_terminals: &[A], src_terminals: &[B], project: impl Fn(&A) -> Option<B>) -> Result<(), String> {
    let mut sim = HashSet::new();
    for t in sim_terminals {
        match project(t) {
            Some(b) => {
                sim.insert(b);
            }
            None => return Err("terminal configuration with undefined image".into()),
        }
    }
    let src: HashSet<B> = src_terminals.iter().cloned().collect();
    if sim == src {
        Ok(())
    } else {
        Err(format!("{} simulating terminal images vs {} simulated terminals", sim.len(), src.len()))
    }
}

/// Terminal-image comparison for rule-table systems too large to explore.
///
/// The terminal candidates over-approximate the reachable terminal
/// configurations; random maximal runs witness reachable ones. Passes when
/// every candidate image is a simulated terminal and every simulated terminal
/// is witnessed; fails on a witnessed terminal whose image is not one.
pub fn check_terminal_images<S: Species, B: Eq + Hash + Clone + fmt::Display>(
    sim: &ScrnSystem<S>,
    rg: &Region,
    project: impl Fn(&Configuration<S>) -> Option<B>,
    src_terminals: &[B],
    runs: u64,
    max_steps: usize,
) -> Verdict<Event> {
    let src: HashSet<B> = src_terminals.iter().cloned().collect();
    let mut witnessed = HashSet::new();
    for seed in 0..runs {
        let (trace, end) = random_trace(sim, rg, seed, max_steps);
        if sim.successors(&end, rg).iter().any(|(_, c)| *c != end) {
            continue;
        }
        match project(&end) {
            Some(img) if src.contains(&img) => {
                witnessed.insert(img);
            }
            Some(img) => return Verdict::Fail { trace, reason: format!("terminal image {img} is not a simulated terminal") },
            None => return Verdict::Fail { trace, reason: "terminal configuration with undefined image".into() },
        }
    }
    let Some(cands) = terminal_candidates(sim, rg, 100_000) else {
        return Verdict::Indeterminate("generated rules have no candidate enumeration".into());
    };
    if !cands.complete {
        return Verdict::Indeterminate("terminal candidate limit reached".into());
    }
    for c in &cands.configs {
        match project(c) {
            Some(img) if src.contains(&img) => {}
            _ => return Verdict::Indeterminate(format!("unwitnessed terminal candidate {c}")),
        }
    }
    match src.iter().find(|b| !witnessed.contains(*b)) {
        Some(b) => Verdict::Indeterminate(format!("no run reached a configuration representing {b}")),
        None => Verdict::Pass,
    }
}

/// Identity projection helper.
pub fn identity<C: Clone>(c: &C) -> Option<C> {
    Some(c.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Coord;
    use crate::model::replay;
    use crate::scrn::{bi, nm, uni, Flavor, Name, Orient, ScrnSystem};

    fn line() -> ScrnSystem<Name> {
        let init = Configuration::from_cells(nm("O"), LatticeKind::Square4, [(Coord::ORIGIN, nm("A"))]);
        ScrnSystem::new(Flavor::Directed, nm("O"), vec![], init, true, vec![bi("A", "O", "A", "B", Orient::Directed(1)), uni("B", "C")]).unwrap()
    }

    #[test]
    fn identity_passes_everything() {
        let s = line();
        let id = identity::<Configuration<Name>>;
        let setup = Setup::new(&s, &s, &id, Region::new(2), 8);
        assert!(check_follows(&setup).verdict.is_pass());
        assert!(check_models(&setup).verdict.is_pass());
        assert!(check_equiv(&setup, None).verdict.is_pass());
    }

    #[test]
    fn depth_zero_is_indeterminate() {
        let s = line();
        let id = identity::<Configuration<Name>>;
        let setup = Setup::new(&s, &s, &id, Region::new(2), 0);
        assert_eq!(check_follows(&setup).verdict.exit_code(), 2);
    }

    #[test]
    fn wrong_product_fails_with_replayable_trace() {
        let s = line();
        let init = s.initial.clone();
        let bad = ScrnSystem::new(Flavor::Directed, nm("O"), vec![], init, true, vec![bi("A", "O", "A", "B", Orient::Directed(1)), uni("B", "D")]).unwrap();
        let id = identity::<Configuration<Name>>;
        let setup = Setup::new(&bad, &s, &id, Region::new(2), 8);
        let r = check_follows(&setup);
        let Verdict::Fail { trace, .. } = &r.verdict else { panic!("expected fail, got {r}") };
        let path = replay(&bad, &Region::new(2), trace).unwrap();
        let last = path.last().unwrap();
        assert!(last.iter().any(|(_, s)| s.as_str() == "D"));
        assert!(check_models(&Setup::new(&s, &bad, &id, Region::new(2), 8)).verdict.is_fail());
    }

    #[test]
    fn undefined_images_are_stitched() {
        // simulator takes two steps per source step through an undefined state
        let s = line();
        let init = s.initial.clone();
        let two = ScrnSystem::new(
            Flavor::Directed,
            nm("O"),
            vec![],
            init,
            true,
            vec![bi("A", "O", "A", "B", Orient::Directed(1)), uni("B", "tmp"), uni("tmp", "C")],
        )
        .unwrap();
        let proj = |c: &Configuration<Name>| c.try_map(nm("O"), |x| (x.as_str() != "tmp").then(|| x.clone()));
        let setup = Setup::new(&two, &s, &proj, Region::new(2), 8);
        assert!(check_follows(&setup).verdict.is_pass());
        assert!(check_models(&setup).verdict.is_pass());
        assert!(check_equiv(&setup, None).verdict.is_pass());
    }
}
