//! Plain-text model files, representation and provenance tables.
//!
//! A model file holds one section header such as `[dscrn]` followed by
//! declaration lines; `#` starts a comment. Systems produced by generated rule
//! families are written as a `generator` line followed by their source model,
//! every source line prefixed with `| `.

use crate::amoebot::{no_flags, AmoebotConfig, AmoebotError, AmoebotSystem, DeltaEntry, DeltaTable, FlagPat, Flags, Movement, Particle, Turn};
use crate::assembly::{AssemblyError, AtamSystem, TaOrient, TaRule, TaSystem, Tile, NULL};
use crate::ca::{CaError, CaRule, CaSystem, Pat};
use crate::compile::Provenance;
use crate::config::Configuration;
use crate::lattice::{Coord, LatticeKind};
use crate::scrn::{dir_name, Flavor, Name, Orient, Reaction, RuleTable, ScrnError, ScrnSystem, Species};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown symbol {sym}")]
    Unknown { line: usize, sym: String },
    #[error("line {line}: {source}")]
    Scrn { line: usize, source: ScrnError },
    #[error("{0}")]
    Assembly(#[from] AssemblyError),
    #[error("{0}")]
    Ca(#[from] CaError),
    #[error("{0}")]
    Amoebot(#[from] AmoebotError),
    #[error("no section header")]
    NoHeader,
    #[error("generator {generator} does not take a [{source_kind}] source")]
    Generator { generator: String, source_kind: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Section {
    Scrn,
    Dscrn,
    Cscrn,
    Atam,
    Ta,
    Ca,
    Amoebot,
}

impl Section {
    pub const ALL: [Section; 7] =
        [Section::Scrn, Section::Dscrn, Section::Cscrn, Section::Atam, Section::Ta, Section::Ca, Section::Amoebot];

    pub fn name(self) -> &'static str {
        match self {
            Section::Scrn => "scrn",
            Section::Dscrn => "dscrn",
            Section::Cscrn => "cscrn",
            Section::Atam => "atam",
            Section::Ta => "ta",
            Section::Ca => "ca",
            Section::Amoebot => "amoebot",
        }
    }

    fn flavor(self) -> Option<Flavor> {
        match self {
            Section::Scrn => Some(Flavor::Plain),
            Section::Dscrn => Some(Flavor::Directed),
            Section::Cscrn => Some(Flavor::Clockwise),
            _ => None,
        }
    }

    fn of_flavor(f: Flavor) -> Section {
        match f {
            Flavor::Plain => Section::Scrn,
            Flavor::Directed => Section::Dscrn,
            Flavor::Clockwise => Section::Cscrn,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Section {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Section::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown model kind {s}"))
    }
}

/// Amoebot particles with an explicit transition table.
#[derive(Clone, Debug)]
pub struct AmoebotModel {
    pub table: DeltaTable<Name, Name>,
    pub initial: AmoebotConfig<Name, Name>,
}

impl AmoebotModel {
    pub fn system(&self) -> AmoebotSystem<Name, Name> {
        AmoebotSystem::new(Arc::new(self.table.clone()), self.initial.clone())
    }
}

/// A system whose rules come from a generated family applied to `source`.
#[derive(Clone, Debug)]
pub struct Generated {
    pub section: Section,
    pub generator: String,
    /// Radius of the particle region for families that fill a region.
    pub radius: Option<i32>,
    pub source: Box<ModelFile>,
}

#[derive(Clone, Debug)]
pub enum ModelFile {
    Scrn(ScrnSystem<Name>),
    Atam(AtamSystem),
    Ta(TaSystem),
    Ca(CaSystem<Name>),
    Amoebot(AmoebotModel),
    Generated(Generated),
}

impl ModelFile {
    pub fn section(&self) -> Section {
        match self {
            ModelFile::Scrn(s) => Section::of_flavor(s.flavor),
            ModelFile::Atam(_) => Section::Atam,
            ModelFile::Ta(_) => Section::Ta,
            ModelFile::Ca(_) => Section::Ca,
            ModelFile::Amoebot(_) => Section::Amoebot,
            ModelFile::Generated(g) => g.section,
        }
    }

    pub fn parse(text: &str) -> Result<ModelFile, FormatError> {
        parse_model(text, 0)
    }

    pub fn lattice(&self) -> LatticeKind {
        match self.section() {
            Section::Cscrn | Section::Amoebot => LatticeKind::Triangular6,
            _ => LatticeKind::Square4,
        }
    }
}

/// Generated families and the source kind each one takes.
pub const GENERATORS: [(&str, Section, Section); 4] = [
    (crate::cross::lock::GENERATOR, Section::Dscrn, Section::Ca),
    (crate::cross::observe::TA, Section::Dscrn, Section::Ta),
    (crate::cross::movement::GENERATOR, Section::Cscrn, Section::Amoebot),
    (crate::cross::particles::DELTA, Section::Amoebot, Section::Cscrn),
];

fn strip_comment(l: &str) -> &str {
    match l.find('#') {
        Some(i) => &l[..i],
        None => l,
    }
}

/// Splits at commas outside brackets.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn braced(tok: &str, line: usize) -> Result<Vec<&str>, FormatError> {
    let inner = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(|| syntax(line, format!("expected {{...}}, got {tok}")))?;
    Ok(if inner.is_empty() { Vec::new() } else { split_top(inner) })
}

fn num<T: FromStr>(tok: &str, line: usize) -> Result<T, FormatError> {
    tok.parse().map_err(|_| syntax(line, format!("expected a number, got {tok}")))
}

fn coord(x: &str, y: &str, line: usize) -> Result<Coord, FormatError> {
    Ok(Coord::new(num(x, line)?, num(y, line)?))
}

fn parse_dir(tok: &str, line: usize) -> Result<u8, FormatError> {
    ["N", "E", "S", "W"].iter().position(|d| *d == tok).map(|d| d as u8).ok_or_else(|| syntax(line, format!("expected N, E, S or W, got {tok}")))
}

fn parse_model(text: &str, offset: usize) -> Result<ModelFile, FormatError> {
    let mut section = None;
    let mut body: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut nested: Vec<String> = Vec::new();
    let mut nested_start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = offset + i + 1;
        if let Some(rest) = raw.strip_prefix('|') {
            if nested.is_empty() {
                nested_start = line - 1;
            }
            nested.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        let l = strip_comment(raw).trim();
        if l.is_empty() {
            continue;
        }
        if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            if section.is_some() {
                return Err(syntax(line, "a file holds one model"));
            }
            section = Some(h.parse::<Section>().map_err(|e| syntax(line, e))?);
            continue;
        }
        if section.is_none() {
            return Err(FormatError::NoHeader);
        }
        body.push((line, l.split_whitespace().collect()));
    }
    let section = section.ok_or(FormatError::NoHeader)?;
    if let Some((line, toks)) = body.iter().find(|(_, t)| t[0] == "generator") {
        let generator = toks.get(1).ok_or_else(|| syntax(*line, "generator needs a name"))?.to_string();
        let mut radius = None;
        for (line, toks) in &body {
            match toks[0] {
                "generator" => {}
                "region" => radius = Some(num(toks.get(1).ok_or_else(|| syntax(*line, "region needs a radius"))?, *line)?),
                other => return Err(syntax(*line, format!("unexpected {other} in a generated model"))),
            }
        }
        let source = parse_model(&nested.join("\n"), nested_start)?;
        let ok = GENERATORS.iter().any(|(g, s, k)| *g == generator && *s == section && *k == source.section());
        if !ok {
            return Err(FormatError::Generator { generator, source_kind: source.section().name().into() });
        }
        return Ok(ModelFile::Generated(Generated { section, generator, radius, source: Box::new(source) }));
    }
    if !nested.is_empty() {
        return Err(syntax(nested_start + 1, "embedded source without a generator line"));
    }
    match section {
        Section::Scrn | Section::Dscrn | Section::Cscrn => parse_scrn(section, &body).map(ModelFile::Scrn),
        Section::Atam => parse_atam(&body).map(ModelFile::Atam),
        Section::Ta => parse_ta(&body).map(ModelFile::Ta),
        Section::Ca => parse_ca(&body).map(ModelFile::Ca),
        Section::Amoebot => parse_amoebot(&body).map(ModelFile::Amoebot),
    }
}

struct Symbols {
    known: BTreeSet<String>,
}

impl Symbols {
    fn check(&self, s: &str, line: usize) -> Result<Name, FormatError> {
        if self.known.contains(s) {
            Ok(Name::new(s))
        } else {
            Err(FormatError::Unknown { line, sym: s.to_string() })
        }
    }
}

fn declared(body: &[(usize, Vec<&str>)], keys: &[&str]) -> Symbols {
    let mut known = BTreeSet::new();
    for (_, t) in body {
        if keys.contains(&t[0]) {
            known.extend(t[1..].iter().map(|s| s.to_string()));
        }
    }
    Symbols { known }
}

fn parse_scrn(section: Section, body: &[(usize, Vec<&str>)]) -> Result<ScrnSystem<Name>, FormatError> {
    let flavor = section.flavor().expect("surface CRN section");
    let syms = declared(body, &["species", "blank"]);
    let mut blank = None;
    let mut species = Vec::new();
    let mut unit_seeded = false;
    let mut frames = HashMap::new();
    let mut rules = Vec::new();
    let mut rule_lines = Vec::new();
    let mut init = Vec::new();
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "blank" if t.len() == 2 => blank = Some(Name::new(t[1])),
            "species" => species.extend(t[1..].iter().map(|s| Name::new(s))),
            "unit-seeded" if t.len() == 1 => unit_seeded = true,
            "frame" if t.len() == 3 => {
                frames.insert(syms.check(t[1], line)?, num::<u8>(t[2], line)?);
            }
            "rxn" => {
                let r = match &t[1..] {
                    [a, "->", b] => Reaction::Uni { a: syms.check(a, line)?, b: syms.check(b, line)? },
                    [a, "+", b, "->", c, "+", d, rest @ ..] => {
                        let orient = match (flavor, rest) {
                            (Flavor::Plain, []) => Orient::Undirected,
                            (Flavor::Directed, [k]) => Orient::Directed(parse_dir(k, line)?),
                            (Flavor::Clockwise, [k]) => Orient::Clockwise(num(k, line)?),
                            _ => return Err(syntax(line, format!("direction does not fit [{section}]"))),
                        };
                        let n = |s: &str| syms.check(s, line);
                        Reaction::Bi { a: n(a)?, b: n(b)?, c: n(c)?, d: n(d)?, orient }
                    }
                    _ => return Err(syntax(line, "expected `rxn A -> B` or `rxn A + B -> C + D [dir]`")),
                };
                rules.push(r);
                rule_lines.push(line);
            }
            "init" if t.len() == 4 => init.push((coord(t[1], t[2], line)?, syms.check(t[3], line)?)),
            k => return Err(syntax(line, format!("unexpected {k} in [{section}]"))),
        }
    }
    let blank = blank.ok_or_else(|| syntax(0, "missing blank declaration"))?;
    let initial = Configuration::from_cells(blank.clone(), flavor.lattice(), init);
    let table = RuleTable::new(rules).with_frames(frames);
    ScrnSystem::with_table(flavor, blank, species, initial, unit_seeded, table).map_err(|e| {
        let line = match &e {
            ScrnError::BlankOnlyReactant { index } | ScrnError::OrientMismatch { index, .. } | ScrnError::BadDirection { index, .. } => {
                rule_lines[*index]
            }
            _ => 0,
        };
        FormatError::Scrn { line, source: e }
    })
}

fn parse_atam(body: &[(usize, Vec<&str>)]) -> Result<AtamSystem, FormatError> {
    let mut glues = declared(body, &[]);
    glues.known.insert(NULL.into());
    let mut strength = BTreeMap::new();
    for (line, t) in body {
        if t[0] == "glue" {
            if t.len() != 3 {
                return Err(syntax(*line, "expected `glue LABEL STRENGTH`"));
            }
            strength.insert(Name::new(t[1]), num(t[2], *line)?);
            glues.known.insert(t[1].to_string());
        }
    }
    let mut tiles = Vec::new();
    let mut seed = None;
    let mut tau = None;
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "glue" => {}
            "tile" if t.len() == 6 => {
                let mut g = [Name::new(NULL), Name::new(NULL), Name::new(NULL), Name::new(NULL)];
                for (k, slot) in g.iter_mut().enumerate() {
                    *slot = glues.check(t[2 + k], line)?;
                }
                tiles.push(Tile { name: Name::new(t[1]), glues: g });
            }
            "seed" if t.len() == 2 => seed = Some(t[1].to_string()),
            "tau" if t.len() == 2 => tau = Some(num(t[1], line)?),
            k => return Err(syntax(line, format!("unexpected {k} in [atam]"))),
        }
    }
    let seed = seed.ok_or_else(|| syntax(0, "missing seed"))?;
    Ok(AtamSystem::new(tiles, &seed, strength, tau.unwrap_or(1))?)
}

fn ta_orient(tok: &str, line: usize) -> Result<TaOrient, FormatError> {
    match tok {
        "h" => Ok(TaOrient::Horizontal),
        "v" => Ok(TaOrient::Vertical),
        _ => Err(syntax(line, format!("expected h or v, got {tok}"))),
    }
}

fn parse_ta(body: &[(usize, Vec<&str>)]) -> Result<TaSystem, FormatError> {
    let syms = declared(body, &["state"]);
    let mut states = Vec::new();
    let mut attachable = Vec::new();
    let mut affinity = BTreeMap::new();
    let mut rules = Vec::new();
    let mut seed = None;
    let mut tau = 1;
    let mut default = 0;
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "state" => states.extend(t[1..].iter().map(|s| Name::new(s))),
            "attach" => {
                for s in &t[1..] {
                    attachable.push(syms.check(s, line)?);
                }
            }
            "affinity" if t.len() == 5 => {
                affinity.insert((syms.check(t[1], line)?, syms.check(t[2], line)?, ta_orient(t[3], line)?), num(t[4], line)?);
            }
            "default-affinity" if t.len() == 2 => default = num(t[1], line)?,
            "rule" if t.len() == 7 && t[3] == "->" => {
                let n = |i: usize| syms.check(t[i], line);
                rules.push(TaRule { x1: n(1)?, y1: n(2)?, x2: n(4)?, y2: n(5)?, orient: ta_orient(t[6], line)? });
            }
            "seed" if t.len() == 2 => seed = Some(syms.check(t[1], line)?),
            "tau" if t.len() == 2 => tau = num(t[1], line)?,
            k => return Err(syntax(line, format!("unexpected {k} in [ta]"))),
        }
    }
    let seed = seed.ok_or_else(|| syntax(0, "missing seed"))?;
    let sys = TaSystem::new(states, attachable, affinity, rules, seed.as_str(), tau)?.with_default_affinity(default);
    sys.check_affinity_strengthening()?;
    Ok(sys)
}

fn parse_ca(body: &[(usize, Vec<&str>)]) -> Result<CaSystem<Name>, FormatError> {
    let syms = declared(body, &["state"]);
    let mut states = Vec::new();
    let mut quiescent = None;
    let mut rules = Vec::new();
    let mut init = Vec::new();
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "state" => states.extend(t[1..].iter().map(|s| Name::new(s))),
            "quiescent" if t.len() == 2 => quiescent = Some(syms.check(t[1], line)?),
            "f" if t.len() == 8 && t[6] == "->" => {
                let mut pattern: [Pat<Name>; 5] = std::array::from_fn(|_| Pat::Any);
                for (k, slot) in pattern.iter_mut().enumerate() {
                    let tok = t[1 + k];
                    *slot = if tok == "*" {
                        Pat::Any
                    } else if tok.starts_with('{') {
                        Pat::OneOf(braced(tok, line)?.into_iter().map(|s| syms.check(s, line)).collect::<Result<_, _>>()?)
                    } else {
                        Pat::Is(syms.check(tok, line)?)
                    };
                }
                let outcomes = braced(t[7], line)?.into_iter().map(|s| syms.check(s, line)).collect::<Result<Vec<_>, _>>()?;
                rules.push(CaRule::new(pattern, outcomes));
            }
            "init" if t.len() == 4 => init.push((coord(t[1], t[2], line)?, syms.check(t[3], line)?)),
            k => return Err(syntax(line, format!("unexpected {k} in [ca]"))),
        }
    }
    let q = quiescent.ok_or_else(|| syntax(0, "missing quiescent state"))?;
    let initial = Configuration::from_cells(q.clone(), LatticeKind::Square4, init);
    Ok(CaSystem::new(states, q, rules, initial)?)
}

fn flag_list(tok: &str, line: usize) -> Result<Flags<Name>, FormatError> {
    if tok == "_" {
        return Ok(no_flags());
    }
    let items = split_top(tok);
    if items.len() != 10 {
        return Err(syntax(line, "flag lists have ten entries"));
    }
    let mut f = no_flags();
    for (slot, x) in f.iter_mut().zip(items) {
        *slot = (x != "_").then(|| Name::new(x));
    }
    Ok(f)
}

fn read_list(tok: &str, line: usize) -> Result<[FlagPat<Name>; 10], FormatError> {
    if tok == "*" {
        return Ok(std::array::from_fn(|_| FlagPat::Any));
    }
    let items = split_top(tok);
    if items.len() != 10 {
        return Err(syntax(line, "read patterns have ten entries"));
    }
    Ok(std::array::from_fn(|i| match items[i] {
        "*" => FlagPat::Any,
        "_" => FlagPat::Is(None),
        x => FlagPat::Is(Some(Name::new(x))),
    }))
}

fn movement(tok: &str, line: usize) -> Result<Movement, FormatError> {
    let arg = |p: &str| tok.strip_prefix(p).map(|n| num::<u8>(n, line));
    if tok == "idle" {
        return Ok(Movement::Idle);
    }
    if let Some(n) = arg("expand") {
        return Ok(Movement::Expand(n?));
    }
    if let Some(n) = arg("contract") {
        return Ok(Movement::Contract(n?));
    }
    if let Some(n) = arg("handover") {
        return Ok(Movement::Handover(n?));
    }
    Err(syntax(line, format!("unknown movement {tok}")))
}

fn parse_amoebot(body: &[(usize, Vec<&str>)]) -> Result<AmoebotModel, FormatError> {
    let mut particles = Vec::new();
    let mut entries = Vec::new();
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "particle" => {
                let (pos, flags) = match t.last() {
                    Some(x) if x.starts_with("flags=") => (&t[1..t.len() - 1], flag_list(&x["flags=".len()..], line)?),
                    _ => (&t[1..], no_flags()),
                };
                let mut p = match pos {
                    [phi, o, x, y] => Particle::contracted(Name::new(phi), num(o, line)?, coord(x, y, line)?),
                    [phi, o, x, y, tx, ty] => {
                        let mut p = Particle::contracted(Name::new(phi), num(o, line)?, coord(x, y, line)?);
                        p.tail = Some(coord(tx, ty, line)?);
                        p
                    }
                    _ => return Err(syntax(line, "expected `particle PHI O X Y [TX TY] [flags=...]`")),
                };
                p.flags = flags;
                particles.push(p);
            }
            "delta" if t.len() == 8 && t[4] == "->" => {
                let tail = match t[2] {
                    "*" => None,
                    "-" => Some(None),
                    k => Some(Some(num(k, line)?)),
                };
                let turn = Turn { phi: Name::new(t[5]), flags: flag_list(t[6], line)?, movement: movement(t[7], line)? };
                entries.push(DeltaEntry { phi: Name::new(t[1]), read: read_list(t[3], line)?, tail, turns: vec![turn] });
            }
            k => return Err(syntax(line, format!("unexpected {k} in [amoebot]"))),
        }
    }
    Ok(AmoebotModel { table: DeltaTable { entries }, initial: AmoebotConfig::new(particles)? })
}

fn print_flags<F: fmt::Display>(flags: &Flags<F>) -> String {
    if flags.iter().all(Option::is_none) {
        return "_".into();
    }
    flags.iter().map(|f| f.as_ref().map_or("_".to_string(), |x| x.to_string())).collect::<Vec<_>>().join(",")
}

fn print_read(read: &[FlagPat<Name>; 10]) -> String {
    if read.iter().all(|p| *p == FlagPat::Any) {
        return "*".into();
    }
    read.iter()
        .map(|p| match p {
            FlagPat::Any => "*".to_string(),
            FlagPat::Is(None) => "_".to_string(),
            FlagPat::Is(Some(x)) => x.to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// `key` followed by `items`, a dozen per line.
fn write_words(out: &mut String, key: &str, items: &[Name]) -> fmt::Result {
    for chunk in items.chunks(12) {
        writeln!(out, "{key} {}", chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "))?;
    }
    Ok(())
}

fn print_ta_orient(o: TaOrient) -> &'static str {
    o.symbol()
}

/// Non-blank species of a table system in first-use order, declared ones first.
pub fn all_species<S: Species>(sys: &ScrnSystem<S>) -> Vec<S> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut add = |s: &S| {
        if *s != sys.blank && seen.insert(s.clone()) {
            out.push(s.clone());
        }
    };
    sys.species.iter().for_each(&mut add);
    sys.initial.iter().for_each(|(_, s)| add(s));
    if let Some(t) = sys.table() {
        for r in t.rules() {
            match r {
                Reaction::Uni { a, b } => [a, b].into_iter().for_each(&mut add),
                Reaction::Bi { a, b, c, d, .. } => [a, b, c, d].into_iter().for_each(&mut add),
            }
        }
    }
    out
}

fn write_scrn(out: &mut String, sys: &ScrnSystem<Name>) -> fmt::Result {
    writeln!(out, "[{}]", Section::of_flavor(sys.flavor))?;
    writeln!(out, "blank {}", sys.blank)?;
    write_words(out, "species", &all_species(sys))?;
    if sys.unit_seeded {
        writeln!(out, "unit-seeded")?;
    }
    let table = sys.table().expect("table system");
    let frames: BTreeMap<_, _> = table.frames().iter().collect();
    for (s, k) in frames {
        writeln!(out, "frame {s} {k}")?;
    }
    for r in table.rules() {
        match r {
            Reaction::Bi { a, b, c, d, orient: Orient::Directed(k) } => writeln!(out, "rxn {a} + {b} -> {c} + {d} {}", dir_name(*k))?,
            _ => writeln!(out, "rxn {r}")?,
        }
    }
    for (c, s) in sys.initial.iter() {
        writeln!(out, "init {} {} {s}", c.x, c.y)?;
    }
    Ok(())
}

fn write_model(out: &mut String, m: &ModelFile) -> fmt::Result {
    match m {
        ModelFile::Scrn(sys) => write_scrn(out, sys)?,
        ModelFile::Atam(sys) => {
            writeln!(out, "[atam]")?;
            writeln!(out, "tau {}", sys.tau)?;
            for (g, k) in &sys.strength {
                writeln!(out, "glue {g} {k}")?;
            }
            for t in &sys.tiles {
                let [n, e, s, w] = &t.glues;
                writeln!(out, "tile {} {n} {e} {s} {w}", t.name)?;
            }
            writeln!(out, "seed {}", sys.tiles[sys.seed].name)?;
        }
        ModelFile::Ta(sys) => {
            writeln!(out, "[ta]")?;
            writeln!(out, "tau {}", sys.tau)?;
            if sys.default_affinity != 0 {
                writeln!(out, "default-affinity {}", sys.default_affinity)?;
            }
            write_words(out, "state", &sys.states)?;
            write_words(out, "attach", &sys.attachable)?;
            for ((a, b, o), g) in &sys.affinity {
                writeln!(out, "affinity {a} {b} {} {g}", print_ta_orient(*o))?;
            }
            for r in &sys.rules {
                writeln!(out, "rule {} {} -> {} {} {}", r.x1, r.y1, r.x2, r.y2, print_ta_orient(r.orient))?;
            }
            writeln!(out, "seed {}", sys.seed)?;
        }
        ModelFile::Ca(sys) => {
            writeln!(out, "[ca]")?;
            write_words(out, "state", &sys.states)?;
            writeln!(out, "quiescent {}", sys.quiescent)?;
            for r in &sys.rules {
                let pats: Vec<String> = r.pattern.iter().map(|p| p.to_string()).collect();
                let outs: Vec<String> = r.outcomes.iter().map(|s| s.to_string()).collect();
                writeln!(out, "f {} -> {{{}}}", pats.join(" "), outs.join(","))?;
            }
            for (c, s) in sys.initial.iter() {
                writeln!(out, "init {} {} {s}", c.x, c.y)?;
            }
        }
        ModelFile::Amoebot(m) => {
            writeln!(out, "[amoebot]")?;
            for p in &m.initial.particles {
                write!(out, "particle {} {} {} {}", p.phi, p.o, p.head.x, p.head.y)?;
                if let Some(t) = p.tail {
                    write!(out, " {} {}", t.x, t.y)?;
                }
                if p.flags.iter().any(Option::is_some) {
                    write!(out, " flags={}", print_flags(&p.flags))?;
                }
                writeln!(out)?;
            }
            for e in &m.table.entries {
                let tail = match e.tail {
                    None => "*".to_string(),
                    Some(None) => "-".to_string(),
                    Some(Some(k)) => k.to_string(),
                };
                for t in &e.turns {
                    writeln!(out, "delta {} {tail} {} -> {} {} {}", e.phi, print_read(&e.read), t.phi, print_flags(&t.flags), t.movement)?;
                }
            }
        }
        ModelFile::Generated(g) => {
            writeln!(out, "[{}]", g.section)?;
            writeln!(out, "generator {}", g.generator)?;
            if let Some(r) = g.radius {
                writeln!(out, "region {r}")?;
            }
            let mut inner = String::new();
            write_model(&mut inner, &g.source)?;
            for l in inner.lines() {
                writeln!(out, "| {l}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_model(&mut s, self)?;
        f.write_str(&s)
    }
}

/// Renames every species of a table system by its display form.
pub fn named_scrn<S: Species>(sys: &ScrnSystem<S>) -> Option<ScrnSystem<Name>> {
    let n = |s: &S| Name::new(&s.to_string());
    let table = sys.table()?;
    let rules = table
        .rules()
        .iter()
        .map(|r| match r {
            Reaction::Uni { a, b } => Reaction::Uni { a: n(a), b: n(b) },
            Reaction::Bi { a, b, c, d, orient } => Reaction::Bi { a: n(a), b: n(b), c: n(c), d: n(d), orient: *orient },
        })
        .collect();
    let frames = table.frames().iter().map(|(s, k)| (n(s), *k)).collect();
    let species = all_species(sys).iter().map(n).collect();
    let initial = Configuration::from_cells(n(&sys.blank), sys.lattice(), sys.initial.iter().map(|(c, s)| (c, n(s))));
    ScrnSystem::with_table(sys.flavor, n(&sys.blank), species, initial, sys.unit_seeded, RuleTable::new(rules).with_frames(frames)).ok()
}

pub fn named_ca<S: Species>(sys: &CaSystem<S>) -> Result<CaSystem<Name>, CaError> {
    let n = |s: &S| Name::new(&s.to_string());
    let pat = |p: &Pat<S>| match p {
        Pat::Any => Pat::Any,
        Pat::Is(s) => Pat::Is(n(s)),
        Pat::OneOf(set) => Pat::OneOf(set.iter().map(n).collect()),
    };
    let rules = sys
        .rules
        .iter()
        .map(|r| CaRule::new(std::array::from_fn(|i| pat(&r.pattern[i])), r.outcomes.iter().map(n)))
        .collect();
    let initial = Configuration::from_cells(n(&sys.quiescent), LatticeKind::Square4, sys.initial.iter().map(|(c, s)| (c, n(s))));
    CaSystem::new(sys.states.iter().map(n).collect(), n(&sys.quiescent), rules, initial)
}

/// Representation of a compiled system: state by state, or the representation
/// built into a generated family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepMap {
    /// `None` is the undefined image.
    Table(BTreeMap<Name, Option<Name>>),
    Family(String),
}

pub const UND: &str = "UND";

impl RepMap {
    pub fn identity(states: impl IntoIterator<Item = Name>) -> Self {
        RepMap::Table(states.into_iter().map(|s| (s.clone(), Some(s))).collect())
    }

    pub fn of<S: Species, T: fmt::Display>(states: impl IntoIterator<Item = S>, r: impl Fn(&S) -> Option<T>) -> Self {
        RepMap::Table(states.into_iter().map(|s| (Name::new(&s.to_string()), r(&s).map(|t| Name::new(&t.to_string())))).collect())
    }

    pub fn image(&self, s: &Name) -> Option<Option<Name>> {
        match self {
            RepMap::Table(m) => m.get(s).cloned(),
            RepMap::Family(_) => None,
        }
    }

    pub fn to_tsv(&self) -> String {
        match self {
            RepMap::Table(m) => {
                let mut s = String::new();
                for (k, v) in m {
                    let _ = writeln!(s, "{k}\t{}", v.as_ref().map_or(UND, |x| x.as_str()));
                }
                s
            }
            RepMap::Family(g) => format!("@generated\t{g}\n"),
        }
    }

    pub fn parse_tsv(text: &str) -> Result<Self, FormatError> {
        let mut m = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let l = raw.trim_end();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l.split_once('\t').ok_or_else(|| syntax(i + 1, "expected two tab-separated columns"))?;
            if k == "@generated" {
                return Ok(RepMap::Family(v.to_string()));
            }
            m.insert(Name::new(k), (v != UND).then(|| Name::new(v)));
        }
        Ok(RepMap::Table(m))
    }
}

/// Provenance rows as `rule<TAB>protocol<TAB>item<TAB>detail`.
pub fn provenance_tsv(rows: &[Vec<Provenance>]) -> String {
    let mut s = String::new();
    for (i, ps) in rows.iter().enumerate() {
        for p in ps {
            let _ = writeln!(s, "{i}\t{p}");
        }
    }
    s
}
