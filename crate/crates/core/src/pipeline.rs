//! Compilation and bounded verification between model files.

use crate::amoebot::{AmoebotConfig, Flags, Particle};
use crate::config::Configuration;
use crate::cross::{invite, lock, movement, observe, particles, to_ta};
use crate::format::{all_species, named_ca, named_scrn, FormatError, Generated, ModelFile, RepMap, Section};
use crate::lattice::Region;
use crate::model::{with_worker_pool, Limits, Model};
use crate::orient;
use crate::scrn::{Name, Species};
use crate::verify::{check_equiv, check_follows, check_models, lattice_images, Setup};
use std::fmt::Display;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no compiler from {from} to {to}")]
    NoCompiler { from: Section, to: Section },
    #[error("the model is {actual}, not {expected}")]
    WrongKind { expected: Section, actual: Section },
    #[error("{0} needs a region radius")]
    NoRegion(Section),
    #[error("compilation failed: {0}")]
    Compile(String),
    #[error("cannot compare a {sim} model against a {src} model")]
    Unsupported { sim: String, src: Section },
    #[error("the generated model embeds a different source than the one given")]
    SourceMismatch,
    #[error("the representation has no entry for {0}")]
    MissingState(String),
    #[error("representation is a generated family ({0}); the simulating model is not")]
    FamilyMismatch(String),
    #[error("symmetric comparison needs a grid model")]
    NoSymmetry,
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn failed(e: impl Display) -> PipelineError {
    PipelineError::Compile(e.to_string())
}

/// A compiled model file with its representation and provenance.
#[derive(Clone, Debug)]
pub struct CompileOutput {
    pub model: ModelFile,
    pub rep: RepMap,
    /// Tab-separated provenance rows.
    pub provenance: String,
}

/// Source and target kinds of every compiler.
pub const COMPILERS: [(Section, Section); 8] = [
    (Section::Dscrn, Section::Scrn),
    (Section::Atam, Section::Dscrn),
    (Section::Ta, Section::Dscrn),
    (Section::Dscrn, Section::Ta),
    (Section::Dscrn, Section::Ca),
    (Section::Ca, Section::Dscrn),
    (Section::Cscrn, Section::Amoebot),
    (Section::Amoebot, Section::Cscrn),
];

fn family(section: Section, generator: &str, radius: Option<i32>, source: &ModelFile) -> CompileOutput {
    CompileOutput {
        model: ModelFile::Generated(Generated { section, generator: generator.into(), radius, source: Box::new(source.clone()) }),
        rep: RepMap::Family(generator.into()),
        provenance: format!("*\t{generator}\tgenerated\tthe rule family is reconstructed from the embedded source\n"),
    }
}

fn named(sys: &crate::scrn::ScrnSystem<impl Species>) -> Result<ModelFile, PipelineError> {
    named_scrn(sys).map(ModelFile::Scrn).ok_or_else(|| failed("compiled species names collide"))
}

/// Compiles `m`; `radius` bounds the particle region of the amoebot compilers.
pub fn compile(m: &ModelFile, to: Section, radius: Option<i32>) -> Result<CompileOutput, PipelineError> {
    let from = m.section();
    let no = || PipelineError::NoCompiler { from, to };
    let out = match (m, to) {
        (ModelFile::Scrn(s), Section::Scrn) if from == Section::Dscrn => {
            let c = orient::compile(s).map_err(failed)?;
            let states = all_species(&c.system).into_iter().chain([c.system.blank.clone()]);
            CompileOutput {
                model: named(&c.system)?,
                rep: RepMap::of(states, |x| c.image(x)),
                provenance: crate::format::provenance_tsv(&c.provenance),
            }
        }
        (ModelFile::Atam(a), Section::Dscrn) => {
            let c = observe::compile_atam(a).map_err(failed)?;
            let states = all_species(&c.system).into_iter().chain([c.system.blank.clone()]);
            CompileOutput {
                model: named(&c.system)?,
                rep: RepMap::of(states, |x| c.image(x)),
                provenance: crate::format::provenance_tsv(&c.provenance),
            }
        }
        (ModelFile::Ta(t), Section::Dscrn) => {
            observe::observer_rules_ta(t, observe::ObserveMutation::None).map_err(failed)?;
            family(Section::Dscrn, observe::TA, None, m)
        }
        (ModelFile::Scrn(s), Section::Ta) if from == Section::Dscrn => {
            let c = to_ta::compile(s).map_err(failed)?;
            CompileOutput {
                rep: RepMap::of(c.system.states.clone(), |x| c.image(x)),
                model: ModelFile::Ta(c.system),
                provenance: crate::format::provenance_tsv(&c.provenance),
            }
        }
        (ModelFile::Scrn(s), Section::Ca) if from == Section::Dscrn => {
            let c = invite::compile(s).map_err(failed)?;
            CompileOutput {
                rep: RepMap::of(c.system.states.clone(), |x| c.image(x)),
                model: ModelFile::Ca(named_ca(&c.system).map_err(failed)?),
                provenance: crate::format::provenance_tsv(&c.provenance),
            }
        }
        (ModelFile::Ca(_), Section::Dscrn) => family(Section::Dscrn, lock::GENERATOR, None, m),
        (ModelFile::Scrn(s), Section::Amoebot) if from == Section::Cscrn => {
            let r = radius.ok_or(PipelineError::NoRegion(Section::Amoebot))?;
            particles::compile(s, &Region::new(r)).map_err(failed)?;
            family(Section::Amoebot, particles::DELTA, Some(r), m)
        }
        (ModelFile::Amoebot(a), Section::Cscrn) => {
            let r = radius.ok_or(PipelineError::NoRegion(Section::Cscrn))?;
            movement::compile(&a.system(), &Region::new(r)).map_err(failed)?;
            family(Section::Cscrn, movement::GENERATOR, Some(r), m)
        }
        _ => return Err(no()),
    };
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Follows,
    Models,
    Equiv,
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "follows" => Ok(Check::Follows),
            "models" => Ok(Check::Models),
            "equiv" => Ok(Check::Equiv),
            _ => Err(format!("unknown check {s}; expected follows, models or equiv")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub check: Check,
    pub radius: i32,
    pub depth: usize,
    pub max_states: usize,
    /// Compare images up to lattice rotation and reflection.
    pub symmetric: bool,
    /// Start lock-based families from their settled encoding.
    pub settled: bool,
    pub threads: Option<usize>,
}

impl VerifyOptions {
    pub fn new(check: Check, radius: i32, depth: usize) -> Self {
        VerifyOptions { check, radius, depth, max_states: 2_000_000, symmetric: false, settled: false, threads: None }
    }
}

/// Report text and exit code of a bounded check.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: String,
    pub code: i32,
}

fn run<T: Model, S: Model>(
    sim: &T,
    src: &S,
    project: &(dyn Fn(&T::Config) -> Option<S::Config> + Sync),
    start: Option<T::Config>,
    sym: Option<(&(dyn Fn(&S::Config) -> Vec<S::Config> + Sync), &(dyn Fn(&S::Config) -> S::Config + Sync))>,
    o: &VerifyOptions,
) -> Outcome
where
    T::Event: Send,
{
    let rg = Region::new(o.radius);
    let mut setup = Setup::new(sim, src, project, rg, o.depth).with_sim_limits(Limits::new(o.depth, o.max_states));
    if let Some(s) = start {
        setup = setup.starting_at(s, None);
    }
    let canon = sym.map(|(images, canon)| {
        setup.symmetric = Some(images);
        canon
    });
    let r = with_worker_pool(o.threads, || match o.check {
        Check::Follows => check_follows(&setup),
        Check::Models => check_models(&setup),
        Check::Equiv => check_equiv(&setup, canon),
    });
    Outcome { code: r.verdict.exit_code(), report: r.to_string() }
}

fn table(rep: &RepMap) -> Result<&std::collections::BTreeMap<Name, Option<Name>>, PipelineError> {
    match rep {
        RepMap::Table(m) => Ok(m),
        RepMap::Family(g) => Err(PipelineError::FamilyMismatch(g.clone())),
    }
}

fn cover(rep: &RepMap, states: impl IntoIterator<Item = impl Display>) -> Result<(), PipelineError> {
    let m = table(rep)?;
    for s in states {
        let s = s.to_string();
        if !m.contains_key(&Name::new(&s)) {
            return Err(PipelineError::MissingState(s));
        }
    }
    Ok(())
}

fn through<S: Species>(rep: &RepMap, blank: Name) -> impl Fn(&Configuration<S>) -> Option<Configuration<Name>> + Sync + '_ {
    move |c: &Configuration<S>| c.try_map(blank.clone(), |x| rep.image(&Name::new(&x.to_string())).flatten())
}

fn flags_through(rep: &RepMap, f: &Flags<Name>) -> Option<Flags<Name>> {
    let mut out = f.clone();
    for x in out.iter_mut().flatten() {
        *x = rep.image(x).flatten()?;
    }
    Some(out)
}

fn particles_through(rep: &RepMap, c: &AmoebotConfig<Name, Name>) -> Option<AmoebotConfig<Name, Name>> {
    let mut ps = Vec::new();
    for p in &c.particles {
        ps.push(Particle { phi: rep.image(&p.phi).flatten()?, flags: flags_through(rep, &p.flags)?, ..p.clone() });
    }
    AmoebotConfig::new(ps).ok()
}

fn grid_blank(m: &ModelFile) -> Option<Name> {
    Some(match m {
        ModelFile::Scrn(s) => s.blank.clone(),
        ModelFile::Atam(_) | ModelFile::Ta(_) => crate::assembly::null(),
        ModelFile::Ca(c) => c.quiescent.clone(),
        _ => return None,
    })
}

/// Runs `$body` with `$s` bound to the grid system inside `$m`.
macro_rules! with_grid {
    ($m:expr, $s:ident => $body:expr, $other:expr) => {
        match $m {
            ModelFile::Scrn($s) => $body,
            ModelFile::Atam($s) => $body,
            ModelFile::Ta($s) => $body,
            ModelFile::Ca($s) => $body,
            _ => $other,
        }
    };
}

fn grid_sym() -> (impl Fn(&Configuration<Name>) -> Vec<Configuration<Name>> + Sync, impl Fn(&Configuration<Name>) -> Configuration<Name> + Sync) {
    (
        move |c: &Configuration<Name>| lattice_images::<Name>(c.lattice())(c),
        |c: &Configuration<Name>| c.canonicalize(),
    )
}

/// States a stored cell of `m` may hold; blank cells are never projected.
fn table_states(m: &ModelFile) -> Vec<Name> {
    match m {
        ModelFile::Scrn(s) => all_species(s),
        ModelFile::Ta(t) => t.states.clone(),
        ModelFile::Ca(c) => c.states.iter().filter(|s| **s != c.quiescent).cloned().collect(),
        ModelFile::Atam(a) => a.tiles.iter().map(|t| t.name.clone()).collect(),
        ModelFile::Amoebot(a) => {
            let mut v: Vec<Name> = Vec::new();
            for p in &a.initial.particles {
                v.push(p.phi.clone());
                v.extend(p.flags.iter().flatten().cloned());
            }
            for e in &a.table.entries {
                v.push(e.phi.clone());
                for t in &e.turns {
                    v.push(t.phi.clone());
                    v.extend(t.flags.iter().flatten().cloned());
                }
            }
            v.sort();
            v.dedup();
            v
        }
        ModelFile::Generated(_) => Vec::new(),
    }
}

/// Checks that `sim` simulates `src` through `rep` on a bounded region.
pub fn verify(src: &ModelFile, sim: &ModelFile, rep: &RepMap, o: &VerifyOptions) -> Result<Outcome, PipelineError> {
    let rg = Region::new(o.radius);
    let (images, canon) = grid_sym();
    let sym_grid = |m: &ModelFile| -> Result<_, PipelineError> {
        match (o.symmetric, grid_blank(m)) {
            (false, _) => Ok(None),
            (true, Some(_)) => Ok(Some((&images as &(dyn Fn(&Configuration<Name>) -> Vec<Configuration<Name>> + Sync), &canon as &(dyn Fn(&Configuration<Name>) -> Configuration<Name> + Sync)))),
            (true, None) => Err(PipelineError::NoSymmetry),
        }
    };
    let unsupported = || PipelineError::Unsupported { sim: sim.section().to_string(), src: src.section() };
    if let ModelFile::Generated(g) = sim {
        if g.source.to_string() != src.to_string() {
            return Err(PipelineError::SourceMismatch);
        }
        if let RepMap::Family(name) = rep {
            if *name != g.generator {
                return Err(PipelineError::FamilyMismatch(name.clone()));
            }
        }
        let sg = Region::new(g.radius.unwrap_or(o.radius));
        return Ok(match (g.generator.as_str(), src) {
            (lock::GENERATOR, ModelFile::Ca(ca)) => {
                let c = lock::compile(ca);
                let project = |x: &Configuration<lock::LockCell>| x.try_map(ca.quiescent.clone(), lock::represent);
                let start = o.settled.then(|| lock::settled(ca, &ca.initial, &rg));
                run(&c.system, ca, &project, start, sym_grid(src)?, o)
            }
            (observe::TA, ModelFile::Ta(ta)) => {
                let c = observe::compile_ta(ta).map_err(failed)?;
                let project = |x: &Configuration<observe::Cell>| x.try_map(crate::assembly::null(), |s| Some(observe::represent(s)));
                run(&c.system, ta, &project, None, sym_grid(src)?, o)
            }
            (movement::GENERATOR, ModelFile::Amoebot(a)) => {
                if o.symmetric {
                    return Err(PipelineError::NoSymmetry);
                }
                let s = a.system();
                let c = movement::compile(&s, &sg).map_err(failed)?;
                let start = o.settled.then(|| movement::settled(&s, &s.initial, &rg));
                run(&c.system, &s, &movement::project::<Name, Name>, start, None, o)
            }
            (particles::DELTA, ModelFile::Scrn(s)) => {
                let c = particles::compile(s, &sg).map_err(failed)?;
                let project = |x: &AmoebotConfig<invite::IaState, particles::Sig>| particles::project(x, &s.blank);
                run(&c.system, s, &project, None, sym_grid(src)?, o)
            }
            _ => return Err(unsupported()),
        });
    }
    if let (ModelFile::Amoebot(t), ModelFile::Amoebot(s)) = (sim, src) {
        if o.symmetric {
            return Err(PipelineError::NoSymmetry);
        }
        cover(rep, table_states(sim))?;
        let project = |c: &AmoebotConfig<Name, Name>| particles_through(rep, c);
        return Ok(run(&t.system(), &s.system(), &project, None, None, o));
    }
    let blank = grid_blank(src).ok_or_else(unsupported)?;
    cover(rep, table_states(sim))?;
    let project = through::<Name>(rep, blank);
    let sym = sym_grid(src)?;
    Ok(with_grid!(sim, t => with_grid!(src, s => run(t, s, &project, None, sym, o), return Err(unsupported())), return Err(unsupported())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DSCRN: &str = "\
[dscrn]
blank O
species C A B
rxn C + A -> B + C E
rxn C + A -> B + C W
init -1 0 C
init 0 0 A
init 1 0 C
";

    fn parse(s: &str) -> ModelFile {
        ModelFile::parse(s).unwrap()
    }

    #[test]
    fn identity_check_passes() {
        let m = parse(DSCRN);
        let rep = RepMap::identity(table_states(&m));
        let out = verify(&m, &m, &rep, &VerifyOptions::new(Check::Follows, 2, 8)).unwrap();
        assert_eq!(out.code, 0, "{}", out.report);
    }

    #[test]
    fn depth_zero_is_indeterminate() {
        let m = parse(DSCRN);
        let rep = RepMap::identity(table_states(&m));
        let out = verify(&m, &m, &rep, &VerifyOptions::new(Check::Equiv, 2, 0)).unwrap();
        assert_eq!(out.code, 2);
    }

    #[test]
    fn compiled_ca_verifies_through_its_printed_table() {
        let m = parse(DSCRN);
        let out = compile(&m, Section::Ca, None).unwrap();
        let text = out.model.to_string();
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(back.to_string(), text);
        let rep = RepMap::parse_tsv(&out.rep.to_tsv()).unwrap();
        for check in [Check::Follows, Check::Models] {
            let r = verify(&m, &back, &rep, &VerifyOptions::new(check, 1, 20)).unwrap();
            assert_eq!(r.code, 0, "{}", r.report);
        }
        assert!(out.provenance.lines().all(|l| l.split('\t').count() == 4));
    }

    #[test]
    fn wrong_representation_fails() {
        let m = parse(DSCRN);
        let out = compile(&m, Section::Ca, None).unwrap();
        let RepMap::Table(mut t) = out.rep else { panic!() };
        t.insert(Name::new("B"), Some(Name::new("A")));
        let r = verify(&m, &out.model, &RepMap::Table(t), &VerifyOptions::new(Check::Follows, 1, 20)).unwrap();
        assert_eq!(r.code, 1, "{}", r.report);
    }

    #[test]
    fn unsupported_pairs_are_reported() {
        let m = parse(DSCRN);
        assert!(matches!(compile(&m, Section::Amoebot, Some(1)), Err(PipelineError::NoCompiler { .. })));
    }
}
