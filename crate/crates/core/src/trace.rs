//! Trace files, configuration dumps and type-erased simulation of loaded models.

use crate::amoebot::{AmoebotConfig, AmoebotSystem};
use crate::config::Configuration;
use crate::cross::{lock, movement, observe, particles};
use crate::format::{FormatError, ModelFile};
use crate::lattice::{Coord, LatticeKind, Region};
use crate::model::{random_trace, Model};
use crate::scrn::Species;
use sha2::{Digest, Sha256};
use std::fmt::{self, Display, Write as _};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("step {step}: no enabled event matches `{event}`")]
    Replay { step: usize, event: String },
    #[error("trace was recorded for model {recorded}, not {given}")]
    ModelMismatch { recorded: String, given: String },
    #[error("cannot build the generated system: {0}")]
    Build(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn syntax(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Syntax { line, msg: msg.into() }
}

/// Hex SHA-256 of the canonical model text.
pub fn model_hash(m: &ModelFile) -> String {
    hex::encode(Sha256::digest(m.to_string().as_bytes()))
}

pub const TRACE_HEADER: &str = "# workbench trace";
pub const CONFIG_HEADER: &str = "# workbench config";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub model: String,
    pub seed: u64,
    pub radius: i32,
    /// Event display strings, one per step.
    pub events: Vec<String>,
}

impl Display for TraceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{TRACE_HEADER}")?;
        writeln!(f, "model sha256:{}", self.model)?;
        writeln!(f, "seed {}", self.seed)?;
        writeln!(f, "region {}", self.radius)?;
        for (i, e) in self.events.iter().enumerate() {
            writeln!(f, "step={i} {e}")?;
        }
        Ok(())
    }
}

impl TraceFile {
    pub fn parse(text: &str) -> Result<TraceFile, TraceError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        match lines.next() {
            Some((_, TRACE_HEADER)) => {}
            _ => return Err(syntax(1, "missing trace header")),
        }
        let mut field = |key: &str| -> Result<String, TraceError> {
            let (n, l) = lines.next().ok_or_else(|| syntax(0, format!("missing {key}")))?;
            l.strip_prefix(key).map(|v| v.trim().to_string()).ok_or_else(|| syntax(n, format!("expected {key}")))
        };
        let model = field("model sha256:")?;
        let seed = field("seed")?.parse().map_err(|_| syntax(3, "bad seed"))?;
        let radius = field("region")?.parse().map_err(|_| syntax(4, "bad region"))?;
        let mut events = Vec::new();
        for (n, l) in lines {
            if l.is_empty() {
                continue;
            }
            if l.starts_with('#') {
                break;
            }
            let (step, ev) = l.split_once(' ').ok_or_else(|| syntax(n, "expected `step=N event`"))?;
            if step != format!("step={}", events.len()) {
                return Err(syntax(n, format!("expected step={}", events.len())));
            }
            events.push(ev.to_string());
        }
        Ok(TraceFile { model, seed, radius, events })
    }
}

/// Drawable view of a configuration: labelled cells and head/tail links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub lattice: LatticeKind,
    pub cells: Vec<(Coord, String)>,
    /// (tail, head) of expanded particles.
    pub links: Vec<(Coord, Coord)>,
}

impl Snapshot {
    pub fn of_grid<S: Display + Clone + Eq>(cfg: &Configuration<S>) -> Snapshot {
        Snapshot { lattice: cfg.lattice(), cells: cfg.iter().map(|(c, s)| (c, s.to_string())).collect(), links: Vec::new() }
    }

    pub fn of_particles<P: Display, F>(cfg: &AmoebotConfig<P, F>) -> Snapshot {
        let mut cells = Vec::new();
        let mut links = Vec::new();
        for p in &cfg.particles {
            cells.push((p.head, p.phi.to_string()));
            if let Some(t) = p.tail {
                cells.push((t, p.phi.to_string()));
                links.push((t, p.head));
            }
        }
        cells.sort();
        Snapshot { lattice: LatticeKind::Triangular6, cells, links }
    }

    pub fn parse(text: &str) -> Result<Snapshot, TraceError> {
        let mut lattice = None;
        let mut cells = Vec::new();
        let mut links = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let l = raw.trim_end();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let mut toks = l.splitn(2, ' ');
            let key = toks.next().unwrap_or_default();
            let rest = toks.next().unwrap_or_default();
            let int = |s: &str| s.parse::<i32>().map_err(|_| syntax(n, format!("expected a number, got {s}")));
            match key {
                "lattice" => {
                    lattice = Some(match rest {
                        "square" => LatticeKind::Square4,
                        "triangular" => LatticeKind::Triangular6,
                        _ => return Err(syntax(n, format!("unknown lattice {rest}"))),
                    })
                }
                "cell" => {
                    let v: Vec<&str> = rest.splitn(3, ' ').collect();
                    let [x, y, label] = v[..] else { return Err(syntax(n, "expected `cell X Y LABEL`")) };
                    cells.push((Coord::new(int(x)?, int(y)?), label.to_string()));
                }
                "link" => {
                    let v: Vec<&str> = rest.split(' ').collect();
                    let [a, b, c, d] = v[..] else { return Err(syntax(n, "expected `link TX TY HX HY`")) };
                    links.push((Coord::new(int(a)?, int(b)?), Coord::new(int(c)?, int(d)?)));
                }
                _ => return Err(syntax(n, format!("unexpected {key}"))),
            }
        }
        Ok(Snapshot { lattice: lattice.ok_or_else(|| syntax(0, "missing lattice line"))?, cells, links })
    }
}

impl Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{CONFIG_HEADER}")?;
        writeln!(f, "lattice {}", self.lattice.name())?;
        for (c, s) in &self.cells {
            writeln!(f, "cell {} {} {s}", c.x, c.y)?;
        }
        for (t, h) in &self.links {
            writeln!(f, "link {} {} {} {}", t.x, t.y, h.x, h.y)?;
        }
        Ok(())
    }
}

/// A loaded model with its configurations reduced to snapshots and its events to strings.
pub trait Runner: Send + Sync {
    fn initial(&self) -> Snapshot;

    /// Random run; returns the event strings and the final configuration.
    fn simulate(&self, rg: &Region, seed: u64, steps: usize) -> (Vec<String>, Snapshot);

    /// Configurations along a recorded run, the initial one first.
    fn replay(&self, rg: &Region, events: &[String]) -> Result<Vec<Snapshot>, TraceError>;
}

struct Sim<M: Model> {
    model: M,
    snap: fn(&M::Config) -> Snapshot,
}

impl<M: Model + Send> Runner for Sim<M> {
    fn initial(&self) -> Snapshot {
        (self.snap)(&self.model.initial())
    }

    fn simulate(&self, rg: &Region, seed: u64, steps: usize) -> (Vec<String>, Snapshot) {
        let (events, end) = random_trace(&self.model, rg, seed, steps);
        (events.iter().map(|e| e.to_string()).collect(), (self.snap)(&end))
    }

    fn replay(&self, rg: &Region, events: &[String]) -> Result<Vec<Snapshot>, TraceError> {
        let mut cfg = self.model.initial();
        let mut out = vec![(self.snap)(&cfg)];
        for (step, ev) in events.iter().enumerate() {
            let next = self.model.successors(&cfg, rg).into_iter().find(|(e, _)| e.to_string() == *ev);
            let (_, c) = next.ok_or_else(|| TraceError::Replay { step, event: ev.clone() })?;
            cfg = c;
            out.push((self.snap)(&cfg));
        }
        Ok(out)
    }
}

fn grid<M>(model: M) -> Box<dyn Runner>
where
    M: Model + Send + 'static,
    M::Config: GridConfig,
{
    Box::new(Sim { model, snap: <M::Config as GridConfig>::snapshot })
}

trait GridConfig {
    fn snapshot(&self) -> Snapshot;
}

impl<S: Species> GridConfig for Configuration<S> {
    fn snapshot(&self) -> Snapshot {
        Snapshot::of_grid(self)
    }
}

fn swarm<P: Species, F: Species>(model: AmoebotSystem<P, F>) -> Box<dyn Runner> {
    Box::new(Sim { model, snap: Snapshot::of_particles::<P, F> })
}

/// Region radius of a generated family: its own when declared, else `fallback`.
pub fn family_radius(m: &ModelFile, fallback: Option<i32>) -> Option<i32> {
    match m {
        ModelFile::Generated(g) => g.radius.or(fallback),
        _ => fallback,
    }
}

pub fn runner(m: &ModelFile, radius: i32) -> Result<Box<dyn Runner>, TraceError> {
    Ok(match m {
        ModelFile::Scrn(s) => grid(s.clone()),
        ModelFile::Atam(s) => grid(s.clone()),
        ModelFile::Ta(s) => grid(s.clone()),
        ModelFile::Ca(s) => grid(s.clone()),
        ModelFile::Amoebot(a) => swarm(a.system()),
        ModelFile::Generated(g) => {
            let rg = Region::new(g.radius.unwrap_or(radius));
            let build = |e: &dyn Display| TraceError::Build(e.to_string());
            match (g.generator.as_str(), g.source.as_ref()) {
                (lock::GENERATOR, ModelFile::Ca(ca)) => grid(lock::compile(ca).system),
                (observe::TA, ModelFile::Ta(ta)) => grid(observe::compile_ta(ta).map_err(|e| build(&e))?.system),
                (movement::GENERATOR, ModelFile::Amoebot(a)) => grid(movement::compile(&a.system(), &rg).map_err(|e| build(&e))?.system),
                (particles::DELTA, ModelFile::Scrn(s)) => swarm(particles::compile(s, &rg).map_err(|e| build(&e))?.system),
                _ => return Err(TraceError::Build(format!("unsupported generator {}", g.generator))),
            }
        }
    })
}

/// Simulates `m` and records the run.
pub fn record(m: &ModelFile, radius: i32, seed: u64, steps: usize) -> Result<(TraceFile, Snapshot), TraceError> {
    let radius = family_radius(m, Some(radius)).unwrap_or(radius);
    let r = runner(m, radius)?;
    let (events, end) = r.simulate(&Region::new(radius), seed, steps);
    Ok((TraceFile { model: model_hash(m), seed, radius, events }, end))
}

/// Configurations along a recorded trace of `m`.
pub fn replay_file(m: &ModelFile, t: &TraceFile) -> Result<Vec<Snapshot>, TraceError> {
    let given = model_hash(m);
    if given != t.model {
        return Err(TraceError::ModelMismatch { recorded: t.model.clone(), given });
    }
    runner(m, t.radius)?.replay(&Region::new(t.radius), &t.events)
}

/// Plain-text listing of several snapshots, used for multi-frame dumps.
pub fn dump_frames(frames: &[Snapshot]) -> String {
    let mut s = String::new();
    for (i, f) in frames.iter().enumerate() {
        let _ = writeln!(s, "# frame {i}");
        let _ = write!(s, "{f}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = "\
[dscrn]
blank O
species s A
unit-seeded
rxn s + O -> A + s E
init 0 0 s
";

    #[test]
    fn same_seed_gives_identical_trace_text() {
        let m = ModelFile::parse(LINE).unwrap();
        let (a, end_a) = record(&m, 3, 42, 20).unwrap();
        let (b, end_b) = record(&m, 3, 42, 20).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(end_a, end_b);
        assert_eq!(a.events.len(), 3);
        assert_eq!(a.events[0], "rule=0 at=(0,0),(1,0) dir=1");
    }

    #[test]
    fn traces_parse_and_replay() {
        let m = ModelFile::parse(LINE).unwrap();
        let (t, end) = record(&m, 3, 7, 20).unwrap();
        let back = TraceFile::parse(&t.to_string()).unwrap();
        assert_eq!(back, t);
        let frames = replay_file(&m, &back).unwrap();
        assert_eq!(frames.last().unwrap(), &end);
        assert_eq!(frames.len(), t.events.len() + 1);
    }

    #[test]
    fn empty_rule_model_gives_empty_trace() {
        let m = ModelFile::parse("[scrn]\nblank O\nspecies A\ninit 0 0 A\n").unwrap();
        let (t, _) = record(&m, 2, 1, 50).unwrap();
        assert!(t.events.is_empty());
    }

    #[test]
    fn snapshots_round_trip() {
        let text = "# workbench config\nlattice triangular\ncell 0 0 a b\ncell 1 0 a b\nlink 1 0 0 0\n";
        let s = Snapshot::parse(text).unwrap();
        assert_eq!(s.to_string(), text);
    }
}
