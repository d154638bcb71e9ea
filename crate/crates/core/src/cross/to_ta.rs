//! Unit-seeded directed surface CRNs as tile automata with a universal blank tile.

use crate::assembly::{AssemblyError, TaOrient, TaRule, TaSystem};
use crate::compile::{Compiled, Provenance};
use crate::lattice::{Coord, E, N, S};
use crate::scrn::{Flavor, Name, Orient, Reaction, ScrnSystem};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

pub const PROTOCOL: &str = "scrn-ta";

#[derive(Debug, Error)]
pub enum ToTaError {
    #[error("source must be a directed surface CRN")]
    NotDirected,
    #[error("source must be unit-seeded at the origin")]
    SeedNotAtOrigin,
    #[error("source rules must be an explicit table")]
    Generated,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToTaMutation {
    None,
    /// North reactions keep their operand order in the vertical rule.
    KeepNorthOrder,
}

pub type TaCompiled = Compiled<TaSystem, Name, Name>;

/// (first, second, first', second', orientation) for `b` in direction `dir` of `a`.
fn place(r: (&Name, &Name, &Name, &Name), dir: u8, mutation: ToTaMutation) -> (Name, Name, Name, Name, TaOrient) {
    let (a, b, c, d) = r;
    let (a, b, c, d) = (a.clone(), b.clone(), c.clone(), d.clone());
    match dir {
        E => (a, b, c, d, TaOrient::Horizontal),
        S => (a, b, c, d, TaOrient::Vertical),
        N if mutation == ToTaMutation::KeepNorthOrder => (a, b, c, d, TaOrient::Vertical),
        N => (b, a, d, c, TaOrient::Vertical),
        _ => (b, a, d, c, TaOrient::Horizontal),
    }
}

pub fn compile(src: &ScrnSystem<Name>) -> Result<TaCompiled, ToTaError> {
    compile_with(src, ToTaMutation::None)
}

pub fn compile_with(src: &ScrnSystem<Name>, mutation: ToTaMutation) -> Result<TaCompiled, ToTaError> {
    if src.flavor != Flavor::Directed {
        return Err(ToTaError::NotDirected);
    }
    let table = src.table().ok_or(ToTaError::Generated)?;
    let seed = match src.initial.iter().collect::<Vec<_>>()[..] {
        [(c, s)] if c == Coord::ORIGIN => s.clone(),
        _ => return Err(ToTaError::SeedNotAtOrigin),
    };
    let mut states: BTreeSet<Name> = src.species.iter().cloned().collect();
    states.insert(src.blank.clone());
    states.insert(seed.clone());
    for r in table.rules() {
        match r {
            Reaction::Uni { a, b } => states.extend([a.clone(), b.clone()]),
            Reaction::Bi { a, b, c, d, .. } => states.extend([a.clone(), b.clone(), c.clone(), d.clone()]),
        }
    }
    let states: Vec<Name> = states.into_iter().collect();
    let mut rules: Vec<TaRule> = Vec::new();
    let mut provenance: Vec<Vec<Provenance>> = Vec::new();
    let mut index: BTreeMap<TaRule, usize> = BTreeMap::new();
    let mut push = |r: TaRule, p: Provenance| match index.get(&r) {
        Some(&i) => {
            if !provenance[i].contains(&p) {
                provenance[i].push(p)
            }
        }
        None => {
            index.insert(r.clone(), rules.len());
            rules.push(r);
            provenance.push(vec![p]);
        }
    };
    for r in table.rules() {
        match r {
            Reaction::Bi { a, b, c, d, orient: Orient::Directed(dir) } => {
                let (x1, y1, x2, y2, orient) = place((a, b, c, d), *dir, mutation);
                push(TaRule { x1, y1, x2, y2, orient }, Provenance::new(PROTOCOL, 1, format!("{r}")));
            }
            Reaction::Bi { .. } => return Err(ToTaError::NotDirected),
            Reaction::Uni { a, b } => {
                for x in &states {
                    for orient in [TaOrient::Horizontal, TaOrient::Vertical] {
                        let p = Provenance::new(PROTOCOL, 2, format!("{r} beside {x}"));
                        push(TaRule { x1: a.clone(), y1: x.clone(), x2: b.clone(), y2: x.clone(), orient }, p.clone());
                        push(TaRule { x1: x.clone(), y1: a.clone(), x2: x.clone(), y2: b.clone(), orient }, p);
                    }
                }
            }
        }
    }
    let tau = 1;
    let system = TaSystem::new(states, vec![src.blank.clone()], BTreeMap::new(), rules, seed.as_str(), tau)?
        .with_default_affinity(tau);
    Ok(Compiled { system, represent: Arc::new(|s: &Name| Some(s.clone())), provenance })
}
