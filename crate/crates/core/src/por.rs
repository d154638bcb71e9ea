//! Stubborn-set reduction for terminal-configuration search on rule tables.
//!
//! Every terminal configuration reachable in the full system is also reached by
//! the reduced search, so terminal sets computed here are exact.

use crate::config::Configuration;
use crate::lattice::{Coord, Region};
use crate::model::Completion;
use crate::scrn::{Event, Orient, Reaction, RuleTable, ScrnSystem, Species};
use std::collections::{HashMap, HashSet, VecDeque};

struct Index<'a, S: Species> {
    sys: &'a ScrnSystem<S>,
    table: &'a RuleTable<S>,
    rg: Region,
    /// species -> (rule, operand position) producing it at that position without reading it there
    produce: HashMap<S, Vec<(usize, u8)>>,
    /// species -> (rule, operand position) reading it
    consume: HashMap<S, Vec<(usize, u8)>>,
    /// species -> species a single cell holding it can turn into, itself included
    reach: HashMap<S, HashSet<S>>,
    /// cell -> species it may ever hold, over-approximated from the start
    possible: HashMap<Coord, HashSet<S>>,
}

impl<'a, S: Species> Index<'a, S> {
    fn new(sys: &'a ScrnSystem<S>, table: &'a RuleTable<S>, rg: Region) -> Self {
        let mut produce: HashMap<S, Vec<(usize, u8)>> = HashMap::new();
        let mut consume: HashMap<S, Vec<(usize, u8)>> = HashMap::new();
        for (i, r) in table.rules().iter().enumerate() {
            match r {
                Reaction::Uni { a, b } => {
                    if a != b {
                        produce.entry(b.clone()).or_default().push((i, 0));
                        consume.entry(a.clone()).or_default().push((i, 0));
                    }
                }
                Reaction::Bi { a, b, c, d, .. } => {
                    if a == c && b == d {
                        continue;
                    }
                    if a != c {
                        produce.entry(c.clone()).or_default().push((i, 0));
                    }
                    if b != d {
                        produce.entry(d.clone()).or_default().push((i, 1));
                    }
                    consume.entry(a.clone()).or_default().push((i, 0));
                    consume.entry(b.clone()).or_default().push((i, 1));
                }
            }
        }
        let reach = cell_reach(table);
        Index { sys, table, rg, produce, consume, reach, possible: HashMap::new() }
    }

    fn can_become(&self, from: &S, to: &S) -> bool {
        from == to || self.reach.get(from).is_some_and(|r| r.contains(to))
    }

    /// Some reactant cell can never hold the species the event needs there.
    fn dead(&self, ev: &Event, cfg: &Configuration<S>) -> bool {
        self.reactants(ev).iter().any(|(c, r, _)| {
            !self.can_become(cfg.get(*c), r) || self.possible.get(c).is_some_and(|p| !p.contains(*r))
        })
    }

    /// Independent per-cell fixpoint: a rule instance contributes its products
    /// once each reactant is possible at its cell.
    fn compute_possible(&mut self, start: &Configuration<S>) {
        let cells: Vec<Coord> = self.rg.cells().collect();
        let mut possible: HashMap<Coord, HashSet<S>> =
            cells.iter().map(|c| (*c, HashSet::from([start.get(*c).clone()]))).collect();
        let mut events = Vec::new();
        for rule in 0..self.table.len() {
            for c in &cells {
                self.place(rule, 0, *c, &mut events);
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for ev in &events {
                let rs = self.reactants(ev);
                if rs.iter().all(|(c, r, _)| possible[c].contains(*r)) {
                    for (c, _, p) in rs {
                        if possible.get_mut(&c).expect("region cell").insert(p.clone()) {
                            changed = true;
                        }
                    }
                }
            }
        }
        self.possible = possible;
    }

    fn dirs(&self, rule: usize) -> Vec<u8> {
        let lat = self.sys.lattice();
        match &self.table.rules()[rule] {
            Reaction::Bi { a, orient, .. } => match orient {
                Orient::Undirected => (0..lat.degree()).collect(),
                Orient::Directed(k) => vec![*k],
                Orient::Clockwise(k) => vec![(self.table.frame(a) + k) % 6],
            },
            Reaction::Uni { .. } => vec![],
        }
    }

    /// Instances of `rule` with operand `pos` placed on `site`.
    fn place(&self, rule: usize, pos: u8, site: Coord, out: &mut Vec<Event>) {
        let lat = self.sys.lattice();
        if matches!(self.table.rules()[rule], Reaction::Uni { .. }) {
            out.push(Event { rule, at: site, partner: None, dir: 0 });
            return;
        }
        for dir in self.dirs(rule) {
            let (at, partner) = if pos == 0 {
                (site, lat.step(site, dir))
            } else {
                (lat.step(site, lat.opposite(dir)), site)
            };
            if self.rg.contains(at) && self.rg.contains(partner) {
                out.push(Event { rule, at, partner: Some(partner), dir });
            }
        }
    }

    fn reactants(&self, ev: &Event) -> Vec<(Coord, &S, &S)> {
        match &self.table.rules()[ev.rule] {
            Reaction::Uni { a, b } => vec![(ev.at, a, b)],
            Reaction::Bi { a, b, c, d, .. } => {
                vec![(ev.at, a, c), (ev.partner.expect("bimolecular event has a partner"), b, d)]
            }
        }
    }

    fn enabled(&self, ev: &Event, cfg: &Configuration<S>) -> bool {
        self.reactants(ev).iter().all(|(c, r, _)| cfg.get(*c) == *r)
    }

    fn writes(&self, ev: &Event, site: Coord) -> bool {
        self.reactants(ev).iter().any(|(c, r, p)| *c == site && r != p)
    }

    fn is_move(&self, ev: &Event) -> bool {
        self.reactants(ev).iter().any(|(_, r, p)| r != p)
    }

    /// Enabled part of a stubborn set grown from `seed`; `None` once the
    /// closure exceeds `cap` candidate events.
    fn stubborn(&self, cfg: &Configuration<S>, seed: Event, cap: usize) -> Option<Vec<Event>> {
        let mut members: HashSet<Event> = HashSet::from([seed]);
        let mut work = vec![seed];
        let mut buf = Vec::new();
        let mut enabled = Vec::new();
        while let Some(t) = work.pop() {
            buf.clear();
            if self.enabled(&t, cfg) {
                enabled.push(t);
                for (site, _, _) in self.reactants(&t) {
                    let cur = cfg.get(site);
                    let t_writes = self.writes(&t, site);
                    for &(rule, pos) in self.consume.get(cur).map(Vec::as_slice).unwrap_or(&[]) {
                        let start = buf.len();
                        self.place(rule, pos, site, &mut buf);
                        if !t_writes {
                            let mut k = start;
                            while k < buf.len() {
                                if self.writes(&buf[k], site) {
                                    k += 1;
                                } else {
                                    buf.swap_remove(k);
                                }
                            }
                        }
                    }
                }
            } else if !self.dead(&t, cfg) {
                let mut best: Option<Vec<Event>> = None;
                for (site, need, _) in self.reactants(&t) {
                    if cfg.get(site) == need {
                        continue;
                    }
                    let mut cand = Vec::new();
                    for &(rule, pos) in self.produce.get(need).map(Vec::as_slice).unwrap_or(&[]) {
                        self.place(rule, pos, site, &mut cand);
                    }
                    cand.retain(|e| !self.dead(e, cfg));
                    // alternatively, whatever first rewrites the current occupant
                    let mut first = Vec::new();
                    for &(rule, pos) in self.consume.get(cfg.get(site)).map(Vec::as_slice).unwrap_or(&[]) {
                        self.place(rule, pos, site, &mut first);
                    }
                    first.retain(|e| self.writes(e, site) && !self.dead(e, cfg));
                    for c in [cand, first] {
                        if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                            best = Some(c);
                        }
                    }
                }
                buf.extend(best.unwrap_or_default());
            }
            for e in buf.drain(..) {
                if self.is_move(&e) && members.insert(e) {
                    work.push(e);
                }
            }
            if members.len() > cap {
                return None;
            }
        }
        Some(enabled)
    }

    fn fire(&self, cfg: &Configuration<S>, ev: &Event) -> Configuration<S> {
        let mut next = cfg.clone();
        for (site, _, prod) in self.reactants(ev) {
            next.set(site, prod.clone());
        }
        next
    }
}

/// Closure size past which the full enabled set is used instead.
const STUBBORN_CAP: usize = 4096;

/// Transitive closure of the per-cell rewrite relation.
fn cell_reach<S: Species>(table: &RuleTable<S>) -> HashMap<S, HashSet<S>> {
    let mut adj: HashMap<S, HashSet<S>> = HashMap::new();
    let mut edge = |a: &S, b: &S| {
        if a != b {
            adj.entry(a.clone()).or_default().insert(b.clone());
        }
    };
    for r in table.rules() {
        match r {
            Reaction::Uni { a, b } => edge(a, b),
            Reaction::Bi { a, b, c, d, .. } => {
                edge(a, c);
                edge(b, d);
            }
        }
    }
    let mut out = HashMap::new();
    for start in adj.keys() {
        let mut seen: HashSet<S> = HashSet::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for y in adj.get(x).into_iter().flatten() {
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        out.insert(start.clone(), seen);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReducedTerminals<S> {
    pub terminals: Vec<Configuration<S>>,
    pub visited: usize,
    pub completion: Completion,
}

/// Terminal configurations of an explicit-table system inside `rg`.
pub fn terminal_set_reduced<S: Species>(sys: &ScrnSystem<S>, rg: &Region, max_states: usize) -> Option<ReducedTerminals<S>> {
    let table = sys.table()?;
    let mut idx = Index::new(sys, table, *rg);
    idx.compute_possible(&sys.initial);
    let mut seen: HashSet<Configuration<S>> = HashSet::from([sys.initial.clone()]);
    let mut queue = VecDeque::from([sys.initial.clone()]);
    let mut terminals = Vec::new();
    let mut completion = Completion::Exhausted;
    while let Some(cfg) = queue.pop_front() {
        let enabled: Vec<Event> = sys
            .enabled_events(&cfg, rg)
            .into_iter()
            .filter(|e| idx.is_move(e))
            .collect();
        if enabled.is_empty() {
            terminals.push(cfg);
            continue;
        }
        // unimolecular seeds first; they tend to close quickly
        let mut seeds = enabled.clone();
        seeds.sort_by_key(|e| e.partner.is_some());
        let mut chosen: Option<Vec<Event>> = None;
        for e in &seeds {
            let Some(set) = idx.stubborn(&cfg, *e, STUBBORN_CAP) else { continue };
            if chosen.as_ref().is_none_or(|c| set.len() < c.len()) {
                let single = set.len() == 1;
                chosen = Some(set);
                if single {
                    break;
                }
            }
        }
        for ev in chosen.unwrap_or(enabled) {
            let next = idx.fire(&cfg, &ev);
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= max_states {
                completion = Completion::Budget;
                continue;
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    terminals.sort();
    Some(ReducedTerminals { terminals, visited: seen.len(), completion })
}

/// Configurations that could be terminal, found without reachability.
#[derive(Debug, Clone)]
pub struct TerminalCandidates<S> {
    pub configs: Vec<Configuration<S>>,
    /// False when the enumeration stopped at its limit.
    pub complete: bool,
}

/// Every configuration inside `rg` that assigns each cell a species it may
/// ever hold (by an independent per-cell fixpoint from the initial
/// configuration) and enables no move. A superset of the reachable terminal
/// configurations.
pub fn terminal_candidates<S: Species>(sys: &ScrnSystem<S>, rg: &Region, limit: usize) -> Option<TerminalCandidates<S>> {
    let table = sys.table()?;
    let mut idx = Index::new(sys, table, *rg);
    idx.compute_possible(&sys.initial);
    let lat = sys.lattice();
    let cells: Vec<Coord> = rg.cells().collect();
    let domains: Vec<Vec<S>> = cells
        .iter()
        .map(|c| {
            let mut d: Vec<S> = idx.possible[c].iter().cloned().collect();
            d.sort();
            d
        })
        .collect();
    let position: HashMap<Coord, usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let uni_move = |x: &S| {
        table.uni_rules(x).iter().any(|&i| matches!(&table.rules()[i], Reaction::Uni { a, b } if a != b))
    };
    let bi_move = |x: &S, y: &S, dir: u8| {
        table.bi_rules(x, y).iter().any(|&i| match &table.rules()[i] {
            Reaction::Bi { a, b, c, d, orient } => table.orient_matches(x, *orient, dir) && (a != c || b != d),
            Reaction::Uni { .. } => false,
        })
    };
    let mut out = TerminalCandidates { configs: Vec::new(), complete: true };
    let mut chosen: Vec<usize> = Vec::with_capacity(cells.len());
    let mut k = 0usize;
    let mut next_choice = 0usize;
    loop {
        if k == cells.len() {
            let cfg = Configuration::from_cells(
                sys.blank.clone(),
                lat,
                cells.iter().zip(&chosen).map(|(c, &j)| (*c, domains[position[c]][j].clone())),
            );
            if out.configs.len() >= limit {
                out.complete = false;
                break;
            }
            out.configs.push(cfg);
        } else {
            let c = cells[k];
            let mut found = None;
            for j in next_choice..domains[k].len() {
                let x = &domains[k][j];
                if uni_move(x) {
                    continue;
                }
                let clash = (0..lat.degree()).any(|dir| {
                    let v = lat.step(c, dir);
                    match position.get(&v) {
                        Some(&pv) if pv < k => {
                            let y = &domains[pv][chosen[pv]];
                            bi_move(x, y, dir) || bi_move(y, x, lat.opposite(dir))
                        }
                        _ => false,
                    }
                });
                if !clash {
                    found = Some(j);
                    break;
                }
            }
            if let Some(j) = found {
                chosen.push(j);
                k += 1;
                next_choice = 0;
                continue;
            }
        }
        // backtrack
        match chosen.pop() {
            Some(j) => {
                k -= 1;
                next_choice = j + 1;
            }
            None => break,
        }
    }
    Some(out)
}
