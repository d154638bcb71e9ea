//! Clockwise surface CRNs as contracted amoebot particles that invite and accept through flags.

use crate::amoebot::{no_flags, AmoebotConfig, AmoebotSystem, Delta, Flags, Movement, Particle, Turn};
use crate::compile::Compiled;
use crate::config::Configuration;
use crate::cross::invite::{represent, Form, IaState};
use crate::lattice::{LatticeKind, Region};
use crate::scrn::{Flavor, Name, Orient, Reaction, ScrnSystem};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const DELTA: &str = "cscrn-invite";

const TRI: LatticeKind = LatticeKind::Triangular6;

#[derive(Debug, Error)]
pub enum ParticlesError {
    #[error("source must be a clockwise surface CRN")]
    NotClockwise,
    #[error("source rules must be an explicit table")]
    Generated,
    #[error("initial species at {0} lies outside the particle region")]
    OutsideRegion(crate::lattice::Coord),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParticlesMutation {
    None,
    /// Rule directions are counted counterclockwise from the species frame.
    Counterclockwise,
}

/// What a particle shows across one edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sig {
    Is(Name),
    /// (own species, invited species) on the edge toward the invitee.
    Inviting(Name, Name),
    InvitingOther(Name),
    /// (own species, inviter species) on the edge toward the inviter.
    Accepting(Name, Name),
    AcceptingOther(Name),
}

impl fmt::Display for Sig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sig::Is(a) => write!(f, "{a}"),
            Sig::Inviting(a, b) => write!(f, "inv({a},{b})"),
            Sig::InvitingOther(a) => write!(f, "inv({a},*)"),
            Sig::Accepting(a, b) => write!(f, "acc({a},{b})"),
            Sig::AcceptingOther(a) => write!(f, "acc({a},*)"),
        }
    }
}

pub fn flags_of(s: &IaState) -> Flags<Sig> {
    let mut f = no_flags();
    for (l, slot) in f.iter_mut().enumerate().take(6) {
        *slot = Some(match s {
            IaState::Plain(a) => Sig::Is(a.clone()),
            IaState::Invite(p, q, d) if *d as usize == l => Sig::Inviting(p.clone(), q.clone()),
            IaState::Invite(p, _, _) => Sig::InvitingOther(p.clone()),
            IaState::Accept(q, p, d) if *d as usize == l => Sig::Accepting(q.clone(), p.clone()),
            IaState::Accept(q, _, _) => Sig::AcceptingOther(q.clone()),
        });
    }
    f
}

/// Transition function built from the invite/accept forms, labels read as global directions.
pub struct InviteDelta {
    forms: BTreeSet<Form>,
    uni: Vec<(Name, Name)>,
}

fn plainish(x: &Option<Sig>) -> bool {
    matches!(x, None | Some(Sig::Is(_)))
}

fn accepting(x: &Option<Sig>) -> bool {
    matches!(x, Some(Sig::Accepting(..)) | Some(Sig::AcceptingOther(_)))
}

impl InviteDelta {
    fn next(&self, phi: &IaState, read: &Flags<Sig>) -> BTreeSet<IaState> {
        let mut out = BTreeSet::new();
        let read = &read[..6];
        match phi {
            IaState::Plain(a) => {
                if read.iter().all(plainish) {
                    for (x, y) in &self.uni {
                        if x == a {
                            out.insert(IaState::Plain(y.clone()));
                        }
                    }
                    for f in self.forms.iter().filter(|f| &f.p == a) {
                        if read[f.dir as usize] == Some(Sig::Is(f.q.clone())) {
                            out.insert(IaState::Invite(a.clone(), f.q.clone(), f.dir));
                        }
                    }
                }
                for (l, x) in read.iter().enumerate() {
                    if let Some(Sig::Inviting(p, q)) = x {
                        let others_ok = read.iter().enumerate().all(|(m, y)| m == l || !accepting(y));
                        if q == a && others_ok {
                            out.insert(IaState::Accept(a.clone(), p.clone(), l as u8));
                        }
                    }
                }
            }
            IaState::Invite(p, q, d) => {
                if read[*d as usize] == Some(Sig::Accepting(q.clone(), p.clone())) {
                    for f in self.forms.iter().filter(|f| &f.p == p && &f.q == q && f.dir == *d) {
                        out.insert(IaState::Plain(f.x.clone()));
                    }
                } else {
                    out.insert(IaState::Plain(p.clone()));
                }
            }
            IaState::Accept(q, p, d) => {
                let back = TRI.opposite(*d);
                for f in self.forms.iter().filter(|f| &f.p == p && &f.q == q && f.dir == back) {
                    if read[*d as usize] == Some(Sig::Is(f.x.clone())) {
                        out.insert(IaState::Plain(f.y.clone()));
                    }
                }
            }
        }
        out.remove(phi);
        out
    }
}

impl Delta<IaState, Sig> for InviteDelta {
    fn turns(&self, phi: &IaState, read: &Flags<Sig>, tail: Option<u8>) -> Vec<Turn<IaState, Sig>> {
        if tail.is_some() {
            return Vec::new();
        }
        self.next(phi, read)
            .into_iter()
            .map(|s| Turn { flags: flags_of(&s), phi: s, movement: Movement::Idle })
            .collect()
    }
}

pub type ParticlesCompiled = Compiled<AmoebotSystem<IaState, Sig>, IaState, Name>;

/// Particles share orientation 0, so local labels coincide with global directions
/// and species frames are folded into the invitation directions.
pub fn compile(src: &ScrnSystem<Name>, rg: &Region) -> Result<ParticlesCompiled, ParticlesError> {
    compile_with(src, rg, ParticlesMutation::None)
}

pub fn compile_with(src: &ScrnSystem<Name>, rg: &Region, mutation: ParticlesMutation) -> Result<ParticlesCompiled, ParticlesError> {
    if src.flavor != Flavor::Clockwise {
        return Err(ParticlesError::NotClockwise);
    }
    let table = src.table().ok_or(ParticlesError::Generated)?;
    let mut forms = BTreeSet::new();
    let mut uni = Vec::new();
    for r in table.rules() {
        match r {
            Reaction::Uni { a, b } => uni.push((a.clone(), b.clone())),
            Reaction::Bi { a, b, c, d, orient: Orient::Clockwise(k) } => {
                let f = table.frame(a);
                let g = match mutation {
                    ParticlesMutation::None => (f + k) % 6,
                    ParticlesMutation::Counterclockwise => (f + 6 - k) % 6,
                };
                forms.insert(Form { p: a.clone(), q: b.clone(), x: c.clone(), y: d.clone(), dir: g });
                forms.insert(Form { p: b.clone(), q: a.clone(), x: d.clone(), y: c.clone(), dir: TRI.opposite(g) });
            }
            Reaction::Bi { .. } => return Err(ParticlesError::NotClockwise),
        }
    }
    if let Some((c, _)) = src.initial.iter().find(|(c, _)| !rg.contains(*c)) {
        return Err(ParticlesError::OutsideRegion(c));
    }
    let particles = rg
        .cells()
        .map(|c| {
            let s = IaState::Plain(src.initial.get(c).clone());
            let mut p = Particle::contracted(s.clone(), 0, c);
            p.flags = flags_of(&s);
            p
        })
        .collect();
    let initial = AmoebotConfig::new(particles).expect("one particle per cell");
    let system = AmoebotSystem::new(Arc::new(InviteDelta { forms, uni }), initial);
    Ok(Compiled { system, represent: Arc::new(represent), provenance: Vec::new() })
}

/// Image of a particle configuration as a surface configuration; `None` while any particle accepts.
pub fn project(cfg: &AmoebotConfig<IaState, Sig>, blank: &Name) -> Option<Configuration<Name>> {
    let mut out = Configuration::empty(blank.clone(), TRI);
    for p in &cfg.particles {
        out.set(p.head, represent(&p.phi)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Coord;
    use crate::model::Model;
    use crate::scrn::{nm, RuleTable};
    use crate::verify::{check_equiv, check_follows, check_models, Setup};
    use std::collections::HashMap;

    /// A (frame 1) swaps with a B two steps clockwise from its local 0; a
    /// second B sits where a counterclockwise reading would look.
    fn toy() -> ScrnSystem<Name> {
        let a = Coord::ORIGIN;
        let init = Configuration::from_cells(
            nm("O"),
            TRI,
            [(a, nm("A")), (TRI.step(a, 2), nm("B")), (TRI.step(a, 0), nm("B"))],
        );
        let table = RuleTable::new(vec![Reaction::Bi {
            a: nm("A"),
            b: nm("B"),
            c: nm("B"),
            d: nm("A"),
            orient: Orient::Clockwise(1),
        }])
        .with_frames(HashMap::from([(nm("A"), 1)]));
        ScrnSystem::with_table(Flavor::Clockwise, nm("O"), vec![], init, false, table).unwrap()
    }

    fn proj(c: &AmoebotConfig<IaState, Sig>) -> Option<Configuration<Name>> {
        project(c, &nm("O"))
    }

    #[test]
    fn invitation_follows_the_frame() {
        let src = toy();
        let rg = Region::new(1);
        let comp = compile(&src, &rg).unwrap();
        let cfg = comp.system.initial();
        let i = cfg.at(Coord::ORIGIN).unwrap();
        let turns = comp.system.enabled_turns(&cfg, i);
        let phis: Vec<_> = turns.iter().map(|(t, _)| t.phi.clone()).collect();
        assert_eq!(phis, vec![IaState::Invite(nm("A"), nm("B"), 2)]);
    }

    #[test]
    fn particles_refine_clockwise_toy() {
        let src = toy();
        let rg = Region::new(1);
        let comp = compile(&src, &rg).unwrap();
        let setup = Setup::new(&comp.system, &src, &proj, rg, 12);
        for r in [check_follows(&setup), check_models(&setup), check_equiv(&setup, None)] {
            assert!(r.verdict.is_pass(), "{r}");
        }
    }

    #[test]
    fn counterclockwise_reading_is_caught() {
        let src = toy();
        let rg = Region::new(1);
        let comp = compile_with(&src, &rg, ParticlesMutation::Counterclockwise).unwrap();
        let setup = Setup::new(&comp.system, &src, &proj, rg, 12);
        assert!(check_follows(&setup).verdict.is_fail());
    }
}
