//! Command line: `symbreak break` and `symbreak gen`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use symbreak_core::pipeline::{run_timed, Config, VerifyLevel};
use symbreak_core::remainder::SearchBudget;
use symbreak_core::testkit::{gen_cliquecolor, gen_php, gen_ramsey};
use symbreak_core::{build_model_graph, Formula};

use crate::dimacs::{emit_dimacs, parse_dimacs, DimacsError};
use crate::graph_dump::write_graph;
use crate::stats::{Stats, WallClock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "symbreak", version, about = "Static symmetry breaking for CNF formulas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add symmetry-breaking clauses to a DIMACS formula.
    Break(BreakArgs),
    /// Write a generated benchmark instance.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct BreakArgs {
    /// Input file; `-` or nothing reads standard input.
    pub input: Option<PathBuf>,
    /// Output file; standard output by default.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Skip Johnson (vertex-permutation) detection.
    #[arg(long)]
    pub no_johnson: bool,
    /// Skip row-column (matrix) detection.
    #[arg(long)]
    pub no_row_column: bool,
    /// Skip row-interchangeability detection.
    #[arg(long)]
    pub no_row: bool,
    /// Skip binary clauses for the leftover generators.
    #[arg(long)]
    pub no_binary: bool,
    /// Skip the search for leftover generators.
    #[arg(long)]
    pub no_remainder: bool,
    /// Positions per lex-leader chain.
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    /// Random dive pairs in the remainder search.
    #[arg(long, default_value_t = 32)]
    pub dive_pairs: u32,
    /// Seed for the remainder dives.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write a JSON run report here.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VerifyArg::StructuresOnly)]
    pub verify_level: VerifyArg,
    /// Write the model graph in DIMACS graph format here.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyArg {
    StructuresOnly,
    AllEmitted,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: Family,
    /// php: n [m]; ramsey: n or k s n; cliquecolor: n or n k c.
    #[arg(required = true)]
    pub params: Vec<u32>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Php,
    Ramsey,
    Cliquecolor,
}

impl BreakArgs {
    pub fn config(&self) -> Config {
        Config {
            johnson: !self.no_johnson,
            row_column: !self.no_row_column,
            row: !self.no_row,
            binary: !self.no_binary,
            remainder: !self.no_remainder,
            max_len: self.max_len,
            budget: SearchBudget {
                dive_pairs: self.dive_pairs,
                seed: self.seed,
            },
            verify: match self.verify_level {
                VerifyArg::StructuresOnly => VerifyLevel::StructuresOnly,
                VerifyArg::AllEmitted => VerifyLevel::AllEmitted,
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(DimacsError),
    #[error("{0:#}")]
    Io(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn main_with<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match &cli.command {
        Command::Break(a) => break_cmd(a, stdin, stdout),
        Command::Gen(a) => gen_cmd(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "symbreak: {e}");
            match e {
                CliError::Parse(_) => EXIT_PARSE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn is_stdio(path: &Option<PathBuf>) -> bool {
    path.as_deref().is_none_or(|p| p == Path::new("-"))
}

fn break_cmd(a: &BreakArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), CliError> {
    let formula = if is_stdio(&a.input) {
        parse_dimacs(BufReader::new(stdin))
    } else {
        let path = a.input.as_deref().unwrap();
        let file = File::open(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        parse_dimacs(BufReader::new(file))
    };
    let formula = match formula {
        Ok(f) => f,
        Err(DimacsError::Io(e)) => return Err(anyhow::Error::from(e).context("cannot read input").into()),
        Err(e) => return Err(CliError::Parse(e)),
    };

    if let Some(path) = &a.dump_graph {
        let mut w = create(path)?;
        write_graph(&mut w, &build_model_graph(&formula))
            .and_then(|()| w.flush())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let out = run_timed(&formula, &a.config(), &WallClock::start());
    let stats = Stats::from_output(&out);
    let header = stats.header_lines();
    write_formula(&a.output, stdout, &formula, out.clauses(), out.aux_count(), &header)?;

    if let Some(path) = &a.stats {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &stats).context("cannot encode stats")?;
        writeln!(w)
            .and_then(|()| w.flush())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn write_formula(
    target: &Option<PathBuf>,
    stdout: &mut dyn Write,
    formula: &Formula,
    added: &[Vec<symbreak_core::Lit>],
    aux: u32,
    header: &[String],
) -> Result<(), CliError> {
    if is_stdio(target) {
        let mut w = BufWriter::new(stdout);
        emit_dimacs(&mut w, formula, added, aux, header)
            .and_then(|()| w.flush())
            .context("cannot write output")?;
    } else {
        let path = target.as_deref().unwrap();
        let mut w = create(path)?;
        emit_dimacs(&mut w, formula, added, aux, header)
            .and_then(|()| w.flush())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn gen_cmd(a: &GenArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = &a.params;
    if p.contains(&0) {
        return Err(CliError::Usage("instance parameters must be positive".into()));
    }
    let (formula, name) = match (a.family, p.as_slice()) {
        (Family::Php, &[n]) if n >= 2 => (gen_php(n, n - 1), format!("php {n} {}", n - 1)),
        (Family::Php, &[n, m]) => (gen_php(n, m), format!("php {n} {m}")),
        (Family::Ramsey, &[n]) => (gen_ramsey(3, 3, n), format!("ramsey 3 3 {n}")),
        (Family::Ramsey, &[k, s, n]) if k >= 2 && s >= 2 => (gen_ramsey(k, s, n), format!("ramsey {k} {s} {n}")),
        (Family::Cliquecolor, &[n]) => (gen_cliquecolor(n, 3, 2), format!("cliquecolor {n} 3 2")),
        (Family::Cliquecolor, &[n, k, c]) if k <= n => {
            (gen_cliquecolor(n, k, c), format!("cliquecolor {n} {k} {c}"))
        }
        _ => return Err(CliError::Usage(format!("bad parameters {p:?} for {:?}", a.family))),
    };
    write_formula(&a.output, stdout, &formula, &[], 0, &[format!("generated {name}")])
}

/// Process entry point.
pub fn main() -> i32 {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with(std::env::args_os(), &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}
