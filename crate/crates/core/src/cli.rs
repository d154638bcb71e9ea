//! Command-line surface: simulate, compile, render and verify model files.

use crate::format::{FormatError, ModelFile, RepMap, Section};
use crate::pipeline::{self, Check, PipelineError, VerifyOptions};
use crate::render;
use crate::trace::{self, Snapshot, TraceError, TraceFile, CONFIG_HEADER, TRACE_HEADER};
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "workbench", version, about = "Simulate, compile and cross-check asynchronous lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random run from the initial configuration; prints the final configuration.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        radius: i32,
        /// Write the trace here instead of printing it before the configuration.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Translate a model into another model kind.
    Compile {
        model: PathBuf,
        #[arg(long)]
        from: Section,
        #[arg(long)]
        to: Section,
        /// Target model file; printed when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Representation table; defaults to the output path with a `.rep.tsv` extension.
        #[arg(long)]
        rep_out: Option<PathBuf>,
        #[arg(long)]
        provenance_out: Option<PathBuf>,
        /// Particle region radius for the amoebot compilers.
        #[arg(long)]
        radius: Option<i32>,
    },
    /// Draw a configuration dump, or one frame of a trace, as SVG.
    Render {
        input: PathBuf,
        /// Model the trace was recorded from.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace frame to draw; the last one by default.
        #[arg(long)]
        frame: Option<usize>,
        /// Grid radius drawn behind the cells.
        #[arg(long)]
        radius: Option<i32>,
    },
    /// Bounded check that SIM simulates SRC through REP.
    /// Exit status 0 pass, 1 fail, 2 indeterminate.
    Verify {
        src: PathBuf,
        sim: PathBuf,
        rep: PathBuf,
        #[arg(long, default_value = "follows")]
        check: Check,
        #[arg(long, default_value_t = 2)]
        radius: i32,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 2_000_000)]
        max_states: usize,
        /// Compare configurations up to lattice rotation and reflection.
        #[arg(long)]
        symmetric: bool,
        /// Start lock-based rule families from their settled encoding.
        #[arg(long)]
        settled: bool,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load(path: &Path) -> Result<ModelFile, CliError> {
    ModelFile::parse(&read(path)?).map_err(|source| CliError::Format { path: path.to_path_buf(), source })
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, text),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn rep_path(out: &Path) -> PathBuf {
    out.with_extension("rep.tsv")
}

/// Runs one command, writing reports to `out`; returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { model, seed, steps, radius, trace_out } => {
            let m = load(&model)?;
            let (t, end) = trace::record(&m, radius, seed, steps)?;
            match trace_out {
                Some(p) => write(&p, &t.to_string())?,
                None => emit(out, None, &t.to_string())?,
            }
            emit(out, None, &end.to_string())?;
            Ok(0)
        }
        Command::Compile { model, from, to, out: target, rep_out, provenance_out, radius } => {
            let m = load(&model)?;
            if m.section() != from {
                return Err(PipelineError::WrongKind { expected: from, actual: m.section() }.into());
            }
            let c = pipeline::compile(&m, to, radius)?;
            emit(out, target.as_deref(), &c.model.to_string())?;
            if let Some(p) = rep_out.or_else(|| target.as_deref().map(rep_path)) {
                write(&p, &c.rep.to_tsv())?;
            }
            if let Some(p) = provenance_out {
                write(&p, &c.provenance)?;
            }
            Ok(0)
        }
        Command::Render { input, model, out: target, frame, radius } => {
            let text = read(&input)?;
            let snap = if text.starts_with(TRACE_HEADER) {
                let path = model.ok_or_else(|| CliError::Usage("rendering a trace needs --model".into()))?;
                let m = load(&path)?;
                let t = TraceFile::parse(&text)?;
                let mut frames = trace::replay_file(&m, &t)?;
                let k = frame.unwrap_or(frames.len() - 1);
                if k >= frames.len() {
                    return Err(CliError::Usage(format!("frame {k} out of range; the trace has {} frames", frames.len())));
                }
                frames.swap_remove(k)
            } else if text.starts_with(CONFIG_HEADER) {
                Snapshot::parse(&text)?
            } else {
                return Err(CliError::Usage(format!("{} is neither a trace nor a configuration dump", input.display())));
            };
            emit(out, target.as_deref(), &render::svg(&snap, radius))?;
            Ok(0)
        }
        Command::Verify { src, sim, rep, check, radius, depth, max_states, symmetric, settled } => {
            let s = load(&src)?;
            let t = load(&sim)?;
            let r = RepMap::parse_tsv(&read(&rep)?).map_err(|source| CliError::Format { path: rep.clone(), source })?;
            let mut o = VerifyOptions::new(check, radius, depth);
            o.max_states = max_states;
            o.symmetric = symmetric;
            o.settled = settled;
            let outcome = pipeline::verify(&s, &t, &r, &o)?;
            emit(out, None, &outcome.report)?;
            Ok(outcome.code)
        }
    }
}

/// Parses `args` and runs; errors are printed to stderr and exit with 2.
pub fn main_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = main_with(std::iter::once("workbench").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    const LINE: &str = "[dscrn]\nblank O\nspecies C A B\nrxn C + A -> B + C E\ninit 0 0 C\ninit 1 0 A\n";

    #[test]
    fn simulate_writes_identical_traces_for_one_seed() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        std::fs::write(&m, LINE).unwrap();
        let a = dir.path().join("a.trace");
        let b = dir.path().join("b.trace");
        for p in [&a, &b] {
            let (code, _) = call(&["simulate", m.to_str().unwrap(), "--seed", "42", "--trace-out", p.to_str().unwrap()]);
            assert_eq!(code, 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn compile_then_verify_exits_zero() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        std::fs::write(&m, LINE).unwrap();
        let out = dir.path().join("ca.txt");
        let (code, _) = call(&["compile", m.to_str().unwrap(), "--from", "dscrn", "--to", "ca", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let rep = dir.path().join("ca.rep.tsv");
        assert!(rep.exists());
        let (code, report) = call(&["verify", m.to_str().unwrap(), out.to_str().unwrap(), rep.to_str().unwrap(), "--radius", "1", "--depth", "10"]);
        assert_eq!(code, 0, "{report}");
        let (code, _) = call(&["verify", m.to_str().unwrap(), out.to_str().unwrap(), rep.to_str().unwrap(), "--depth", "0"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn render_trace_frame() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        std::fs::write(&m, LINE).unwrap();
        let t = dir.path().join("t.trace");
        call(&["simulate", m.to_str().unwrap(), "--trace-out", t.to_str().unwrap()]);
        let (code, svg) = call(&["render", t.to_str().unwrap(), "--model", m.to_str().unwrap(), "--frame", "0"]);
        assert_eq!(code, 0);
        assert!(svg.contains(">A<"));
        let (code, _) = call(&["render", t.to_str().unwrap()]);
        assert_eq!(code, 2);
    }

    #[test]
    fn bad_model_reports_line_and_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        std::fs::write(&m, "[dscrn]\nblank O\nrxn A -> B\n").unwrap();
        assert_eq!(call(&["simulate", m.to_str().unwrap()]).0, 2);
    }
}
