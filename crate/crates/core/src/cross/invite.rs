//! Directed surface CRNs as nondeterministic asynchronous CA through invite/accept pairs.

use crate::ca::{CaError, CaRule, CaSystem, Pat};
use crate::compile::{Compiled, Provenance};
use crate::config::Configuration;
use crate::lattice::LatticeKind;
use crate::scrn::{dir_name, Flavor, Name, Orient, Reaction, ScrnSystem};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const PROTOCOL: &str = "dscrn-ca";

#[derive(Debug, Error)]
pub enum InviteError {
    #[error("source must be a directed surface CRN")]
    NotDirected,
    #[error("source rules must be an explicit table")]
    Generated,
    #[error(transparent)]
    Ca(#[from] CaError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InviteMutation {
    None,
    /// Rejected invitations are never withdrawn.
    NoRollback,
}

/// A cell holding a source species, or one side of a pending bimolecular step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IaState {
    Plain(Name),
    /// (own species, invited species, direction of the invitee)
    Invite(Name, Name, u8),
    /// (own species, inviter species, direction of the inviter)
    Accept(Name, Name, u8),
}

impl IaState {
    pub fn is_plain(&self) -> bool {
        matches!(self, IaState::Plain(_))
    }
}

impl fmt::Display for IaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IaState::Plain(s) => write!(f, "{s}"),
            IaState::Invite(a, b, d) => write!(f, "inv({a},{b},{})", dir_name(*d)),
            IaState::Accept(a, b, d) => write!(f, "acc({a},{b},{})", dir_name(*d)),
        }
    }
}

pub fn represent(s: &IaState) -> Option<Name> {
    match s {
        IaState::Plain(a) | IaState::Invite(a, _, _) => Some(a.clone()),
        IaState::Accept(..) => None,
    }
}

pub type CaCompiled = Compiled<CaSystem<IaState>, IaState, Name>;

/// A bimolecular reaction seen from the inviting side: (inviter, invitee,
/// inviter', invitee', direction of the invitee).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Form {
    pub p: Name,
    pub q: Name,
    pub x: Name,
    pub y: Name,
    pub dir: u8,
}

fn opp(d: u8) -> u8 {
    LatticeKind::Square4.opposite(d)
}

/// Both reactants may invite: each directed rule yields itself and its mirror.
pub fn forms(rules: &[Reaction<Name>]) -> BTreeSet<Form> {
    let mut out = BTreeSet::new();
    for r in rules {
        if let Reaction::Bi { a, b, c, d, orient: Orient::Directed(k) } = r {
            out.insert(Form { p: a.clone(), q: b.clone(), x: c.clone(), y: d.clone(), dir: *k });
            out.insert(Form { p: b.clone(), q: a.clone(), x: d.clone(), y: c.clone(), dir: opp(*k) });
        }
    }
    out
}

/// Pattern with `center`, `at` in direction `dir` and `rest` elsewhere.
fn hood(center: Pat<IaState>, dir: Option<(u8, Pat<IaState>)>, rest: &Pat<IaState>) -> [Pat<IaState>; 5] {
    let mut p = [center, rest.clone(), rest.clone(), rest.clone(), rest.clone()];
    if let Some((d, at)) = dir {
        p[1 + d as usize] = at;
    }
    p
}

pub fn compile(src: &ScrnSystem<Name>) -> Result<CaCompiled, InviteError> {
    compile_with(src, InviteMutation::None)
}

pub fn compile_with(src: &ScrnSystem<Name>, mutation: InviteMutation) -> Result<CaCompiled, InviteError> {
    if src.flavor != Flavor::Directed {
        return Err(InviteError::NotDirected);
    }
    let table = src.table().ok_or(InviteError::Generated)?;
    let mut species: BTreeSet<Name> = src.species.iter().cloned().collect();
    species.insert(src.blank.clone());
    species.extend(src.initial.iter().map(|(_, s)| s.clone()));
    for r in table.rules() {
        match r {
            Reaction::Uni { a, b } => species.extend([a.clone(), b.clone()]),
            Reaction::Bi { a, b, c, d, .. } => species.extend([a.clone(), b.clone(), c.clone(), d.clone()]),
        }
    }
    let forms = forms(table.rules());
    let plain: BTreeSet<IaState> = species.iter().cloned().map(IaState::Plain).collect();
    let invites: BTreeSet<IaState> = forms.iter().map(|f| IaState::Invite(f.p.clone(), f.q.clone(), f.dir)).collect();
    let accepts: BTreeSet<IaState> = forms.iter().map(|f| IaState::Accept(f.q.clone(), f.p.clone(), opp(f.dir))).collect();
    let mut states: BTreeSet<IaState> = plain.clone();
    states.extend(invites.iter().cloned());
    states.extend(accepts.iter().cloned());

    let only_plain = Pat::OneOf(plain.clone());
    let not_accepting = Pat::OneOf(plain.union(&invites).cloned().collect());
    let mut rules = Vec::new();
    let mut provenance = Vec::new();
    let mut add = |r: CaRule<IaState>, p: Provenance| {
        rules.push(r);
        provenance.push(vec![p]);
    };
    let is = |s: IaState| Pat::Is(s);

    for r in table.rules() {
        if let Reaction::Uni { a, b } = r {
            add(
                CaRule::new(hood(is(IaState::Plain(a.clone())), None, &only_plain), [IaState::Plain(b.clone())]),
                Provenance::new(PROTOCOL, 1, format!("{r}")),
            );
        }
    }
    let pairs: BTreeSet<(Name, Name, u8)> = forms.iter().map(|f| (f.p.clone(), f.q.clone(), f.dir)).collect();
    for (p, q, d) in &pairs {
        let inv = IaState::Invite(p.clone(), q.clone(), *d);
        let acc = IaState::Accept(q.clone(), p.clone(), opp(*d));
        add(
            CaRule::new(
                hood(is(IaState::Plain(p.clone())), Some((*d, is(IaState::Plain(q.clone())))), &only_plain),
                [inv.clone()],
            ),
            Provenance::new(PROTOCOL, 1, format!("{p} invites {q} {}", dir_name(*d))),
        );
        add(
            CaRule::new(
                hood(is(IaState::Plain(q.clone())), Some((opp(*d), is(inv.clone()))), &not_accepting),
                [acc.clone()],
            ),
            Provenance::new(PROTOCOL, 2, format!("{q} accepts {p} {}", dir_name(opp(*d)))),
        );
        if mutation != InviteMutation::NoRollback {
            let rejected: BTreeSet<IaState> = states.iter().filter(|s| **s != acc).cloned().collect();
            add(
                CaRule::new(hood(is(inv.clone()), Some((*d, Pat::OneOf(rejected))), &Pat::Any), [IaState::Plain(p.clone())]),
                Provenance::new(PROTOCOL, 4, format!("{p} withdraws from {q} {}", dir_name(*d))),
            );
        }
    }
    for f in &forms {
        let inv = IaState::Invite(f.p.clone(), f.q.clone(), f.dir);
        let acc = IaState::Accept(f.q.clone(), f.p.clone(), opp(f.dir));
        let detail = format!("{} + {} -> {} + {} {}", f.p, f.q, f.x, f.y, dir_name(f.dir));
        add(
            CaRule::new(hood(is(inv), Some((f.dir, is(acc.clone()))), &Pat::Any), [IaState::Plain(f.x.clone())]),
            Provenance::new(PROTOCOL, 3, format!("inviter side of {detail}")),
        );
        add(
            CaRule::new(hood(is(acc), Some((opp(f.dir), is(IaState::Plain(f.x.clone())))), &Pat::Any), [IaState::Plain(f.y.clone())]),
            Provenance::new(PROTOCOL, 3, format!("accepter side of {detail}")),
        );
    }

    let initial = Configuration::from_cells(
        IaState::Plain(src.blank.clone()),
        LatticeKind::Square4,
        src.initial.iter().map(|(c, s)| (c, IaState::Plain(s.clone()))),
    );
    let system = CaSystem::new(states.into_iter().collect(), IaState::Plain(src.blank.clone()), rules, initial)?;
    Ok(Compiled { system, represent: Arc::new(represent), provenance })
}

/// Cells holding an invite or accept state.
pub fn pending(cfg: &Configuration<IaState>) -> usize {
    cfg.iter().filter(|(_, s)| !s.is_plain()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Coord, Region, E, W};
    use crate::model::{explore, Limits};
    use crate::scrn::{bi, nm};
    use crate::verify::{check_equiv, check_follows, check_models, Setup};

    /// C A C on a line; either C may turn an adjacent A into C while becoming B.
    fn line_toy(extra: Vec<Reaction<Name>>) -> ScrnSystem<Name> {
        let init = Configuration::from_cells(
            nm("O"),
            LatticeKind::Square4,
            [(Coord::new(-1, 0), nm("C")), (Coord::ORIGIN, nm("A")), (Coord::new(1, 0), nm("C"))],
        );
        let mut rules = vec![bi("C", "A", "B", "C", Orient::Directed(E)), bi("C", "A", "B", "C", Orient::Directed(W))];
        rules.extend(extra);
        ScrnSystem::new(Flavor::Directed, nm("O"), vec![], init, false, rules).unwrap()
    }

    fn project(c: &Configuration<IaState>) -> Option<Configuration<Name>> {
        c.try_map(nm("O"), represent)
    }

    #[test]
    fn mirrored_forms_cover_both_reactants() {
        let f = forms(&[bi("C", "A", "B", "C", Orient::Directed(E))]);
        assert_eq!(f.len(), 2);
        assert!(f.contains(&Form { p: nm("A"), q: nm("C"), x: nm("C"), y: nm("B"), dir: W }));
    }

    #[test]
    fn toy_refines_source() {
        let src = line_toy(vec![]);
        let comp = compile(&src).unwrap();
        let setup = Setup::new(&comp.system, &src, &project, Region::new(1), 20);
        for r in [check_follows(&setup), check_models(&setup), check_equiv(&setup, None)] {
            assert!(r.verdict.is_pass(), "{r}");
        }
    }

    #[test]
    fn one_accept_and_clean_terminals() {
        let src = line_toy(vec![]);
        let comp = compile(&src).unwrap();
        let g = explore(&comp.system, &Region::new(1), Limits::depth(20));
        assert!(g.exact());
        for c in &g.states {
            let accepts = c.iter().filter(|(_, s)| matches!(s, IaState::Accept(..))).count();
            assert!(accepts <= 1, "{c}");
        }
        for t in g.terminals() {
            assert_eq!(pending(&g.states[t]), 0, "{}", g.states[t]);
        }
    }

    #[test]
    fn unanswered_invite_withdraws() {
        let src = line_toy(vec![]);
        let comp = compile(&src).unwrap();
        let cfg = Configuration::from_cells(
            IaState::Plain(nm("O")),
            LatticeKind::Square4,
            [(Coord::ORIGIN, IaState::Invite(nm("C"), nm("A"), E)), (Coord::new(1, 0), IaState::Plain(nm("B")))],
        );
        let out = comp.system.local_outcomes(&cfg, Coord::ORIGIN);
        assert_eq!(out, [IaState::Plain(nm("C"))].into_iter().collect());
    }

    #[test]
    fn missing_rollback_is_caught() {
        let src = line_toy(vec![]);
        let good = compile(&src).unwrap();
        let setup = Setup::new(&good.system, &src, &project, Region::new(1), 12);
        assert!(check_models(&setup).verdict.is_pass());
        let bad = compile_with(&src, InviteMutation::NoRollback).unwrap();
        let setup = Setup::new(&bad.system, &src, &project, Region::new(1), 12);
        assert!(check_follows(&setup).verdict.is_pass());
        assert!(check_models(&setup).verdict.is_fail());
    }
}
