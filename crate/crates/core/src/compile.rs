//! Shared plumbing for model-to-model compilers.

use crate::scrn::{normalize, Reaction, Species};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Where a generated rule comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub protocol: &'static str,
    pub item: u8,
    pub detail: String,
}

impl Provenance {
    pub fn new(protocol: &'static str, item: u8, detail: impl Into<String>) -> Self {
        Provenance { protocol, item, detail: detail.into() }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.protocol, self.item, self.detail)
    }
}

/// Deduplicating reaction list with multi-provenance.
#[derive(Clone, Debug, Default)]
pub struct RuleSet<S: Species> {
    pub rules: Vec<Reaction<S>>,
    pub provenance: Vec<Vec<Provenance>>,
    index: HashMap<Reaction<S>, usize>,
}

impl<S: Species> RuleSet<S> {
    pub fn new() -> Self {
        RuleSet { rules: Vec::new(), provenance: Vec::new(), index: HashMap::new() }
    }

    pub fn push(&mut self, r: Reaction<S>, p: &Provenance) {
        let r = normalize(r);
        match self.index.get(&r) {
            Some(&i) => {
                if !self.provenance[i].contains(p) {
                    self.provenance[i].push(p.clone());
                }
            }
            None => {
                self.index.insert(r.clone(), self.rules.len());
                self.rules.push(r);
                self.provenance.push(vec![p.clone()]);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Provenance rows as `rule<TAB>protocol<TAB>item<TAB>detail`.
    pub fn provenance_rows(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, ps) in self.provenance.iter().enumerate() {
            for p in ps {
                out.push(format!("{i}\t{p}"));
            }
        }
        out
    }
}

pub type Represent<T, S> = Arc<dyn Fn(&T) -> Option<S> + Send + Sync>;

/// A generated system with its representation function and rule provenance.
#[derive(Clone)]
pub struct Compiled<Sys, T, S> {
    pub system: Sys,
    pub represent: Represent<T, S>,
    /// Per generated rule; empty for generated rule families.
    pub provenance: Vec<Vec<Provenance>>,
}

impl<Sys, T, S> Compiled<Sys, T, S> {
    /// `None` is the undefined image.
    pub fn image(&self, t: &T) -> Option<S> {
        (self.represent)(t)
    }
}

impl<Sys: fmt::Debug, T, S> fmt::Debug for Compiled<Sys, T, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Compiled").field("system", &self.system).field("rules", &self.provenance.len()).finish()
    }
}
