//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ctxlab::compilers::CompilerKind;
use ctxlab::qfhe::FheBackend;
use ctxlab::tcf::{TcfBackend, MAX_LAMBDA, MIN_LAMBDA};

#[derive(Debug, Parser)]
#[command(name = "ctxlab", version, about = "Compiled contextuality tests and proofs of quantumness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Non-contextual and quantum values of a game.
    Values(ValuesArgs),
    /// Proof-of-quantumness win rates against the built-in provers.
    Poq(PoqArgs),
    /// Win rates of provers against a compiled game, with theorem bounds.
    Compile(CompileArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here; `.csv` selects CSV, anything else JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValuesArgs {
    /// Built-in game id (magic-square, kcbs, chsh) or path to a JSON game.
    #[arg(long)]
    pub game: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Run {
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 8, value_parser = parse_lambda)]
    pub lambda: usize,
    #[arg(long, default_value = "ideal")]
    pub tcf: TcfBackend,
    /// Exit with status 2 if any row violates its bound.
    #[arg(long = "assert")]
    pub check: bool,
    /// Write every session as JSON lines here.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PoqArgs {
    /// `all`, `honest`, or a classical strategy name.
    #[arg(long, default_value = "all")]
    pub prover: String,
    #[command(flatten)]
    pub run: Run,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub game: String,
    /// 1-1, c-1 or cm1-1.
    #[arg(long)]
    pub compiler: CompilerKind,
    /// `all`, `honest`, `truth-table` or `feasible`.
    #[arg(long, default_value = "all")]
    pub prover: String,
    #[arg(long, default_value = "stub")]
    pub fhe: FheBackend,
    #[command(flatten)]
    pub run: Run,
}

fn parse_lambda(s: &str) -> Result<usize, String> {
    let l: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (MIN_LAMBDA..=MAX_LAMBDA).contains(&l) {
        Ok(l)
    } else {
        Err(format!("must lie in [{MIN_LAMBDA}, {MAX_LAMBDA}]"))
    }
}
