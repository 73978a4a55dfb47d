//! The three subcommands, each producing a [`Report`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ctxlab::compilers::{
    self, completeness_bound, feasible_inconsistent_prover, honest_quantum_prover, soundness_bound,
    truthtable_prover, CompiledGame, CompiledProver, CompilerConfig, CompilerKind, SessionOptions,
};
use ctxlab::games::{pad_strategy, QuantumStrategy};
use ctxlab::mc::RateEstimate;
use ctxlab::poq::{self, analytic_win_rate, rewind_game, ClassicalStrategy, HonestQuantumProver, PoqProver};

use crate::args::{CompileArgs, PoqArgs, Run, ValuesArgs};
use crate::games::load;
use crate::report::{write_jsonl, Relation, Report, Row, RunConfig};
use crate::CliError;

/// Exact per-sample analyses run on at most this many key pairs.
const ANALYTIC_SAMPLES: u64 = 1_000;

fn run_error(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn to_f64(w: ctxlab::games::Weight) -> f64 {
    *w.numer() as f64 / *w.denom() as f64
}

pub fn values(args: &ValuesArgs) -> Result<Report, CliError> {
    let loaded = load(&args.game)?;
    let nc = loaded.game.nc_value().map_err(run_error)?;
    let mut nc_row = Row::plain("deterministic-tables", "nc_value", to_f64(nc.value));
    nc_row.exact = Some(nc.value.to_string());
    let mut rows = vec![nc_row];
    if let Some(s) = &loaded.strategy {
        rows.push(Row::plain(
            "bundled-strategy",
            "quantum_value",
            s.value_in(&loaded.game).map_err(run_error)?,
        ));
    }
    let config = RunConfig {
        game: Some(args.game.clone()),
        compiler: None,
        prover: None,
        trials: None,
        seed: None,
        lambda: None,
        tcf: None,
        fhe: None,
    };
    Ok(Report::new("values", config, rows))
}

/// Optional JSON-lines sink for transcripts.
struct Transcripts(Option<BufWriter<File>>);

impl Transcripts {
    fn open(path: Option<&Path>) -> Result<Self, CliError> {
        path.map(|p| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        })
        .transpose()
        .map(Transcripts)
    }

    fn enabled(&self) -> bool {
        self.0.is_some()
    }

    fn write<T: serde::Serialize>(&mut self, prover: &str, items: &[T]) -> Result<(), CliError> {
        match &mut self.0 {
            Some(w) => write_jsonl(w, prover, items),
            None => Ok(()),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.0 {
            Some(mut w) => w.flush().map_err(|e| CliError::Io(e.to_string())),
            None => Ok(()),
        }
    }
}

fn accept_rate(accepts: impl Iterator<Item = bool>, trials: u64) -> RateEstimate {
    RateEstimate::from_counts(accepts.filter(|&a| a).count() as u64, trials)
}

fn run_config(run: &Run, prover: &str) -> RunConfig {
    RunConfig {
        game: None,
        compiler: None,
        prover: Some(prover.into()),
        trials: Some(run.trials),
        seed: Some(run.seed),
        lambda: Some(run.lambda),
        tcf: Some(run.tcf.to_string()),
        fhe: None,
    }
}

pub fn poq(args: &PoqArgs) -> Result<Report, CliError> {
    let run = &args.run;
    let (honest, zoo): (bool, Vec<ClassicalStrategy>) = match args.prover.as_str() {
        "all" => (true, ClassicalStrategy::ZOO.to_vec()),
        "honest" => (true, vec![]),
        name => match ClassicalStrategy::from_name(name) {
            Some(s) => (false, vec![s]),
            None => {
                let names: Vec<&str> = ClassicalStrategy::ZOO.iter().map(|s| s.name()).collect();
                return Err(CliError::Config(format!(
                    "unknown prover {name:?}; expected all, honest, {}",
                    names.join(", ")
                )));
            }
        },
    };
    let mut sink = Transcripts::open(run.transcripts.as_deref())?;
    let mut rows = vec![];
    if honest {
        let rate = poq_rate(&HonestQuantumProver, "honest", run, &mut sink)?;
        rows.push(Row::estimate(
            "honest",
            "win_rate",
            &rate,
            poq::honest_win_probability(),
            Relation::Ge,
            "cos^2(pi/8)",
        ));
    }
    for s in zoo {
        let name = s.name();
        let rate = poq_rate(&s, name, run, &mut sink)?;
        rows.push(Row::estimate(name, "win_rate", &rate, 0.75, Relation::Le, "3/4"));
        let analytic = analytic_win_rate(&s, run.lambda, run.tcf, run.trials.min(ANALYTIC_SAMPLES), run.seed)
            .map_err(run_error)?;
        rows.push(Row::exact(name, "analytic_max", analytic.max, 0.75, Relation::Le, "3/4"));
        let guess = rewind_game(&s, run.lambda, run.tcf, run.trials, run.seed).map_err(run_error)?;
        rows.push(Row::estimate(
            name,
            "rewind_guess",
            &guess,
            2.0 * rate.rate - 1.0,
            Relation::Ge,
            "2*win_rate-1",
        ));
    }
    sink.finish()?;
    Ok(Report::new("poq", run_config(run, &args.prover), rows))
}

/// Win rate from the transcripts when they are wanted, else directly; both
/// walk the same seeded sessions.
fn poq_rate<P: PoqProver + ?Sized>(
    prover: &P,
    name: &str,
    run: &Run,
    sink: &mut Transcripts,
) -> Result<RateEstimate, CliError> {
    if sink.enabled() {
        let ts = poq::run_transcripts(prover, run.lambda, run.tcf, run.trials, run.seed).map_err(run_error)?;
        sink.write(name, &ts)?;
        Ok(accept_rate(ts.iter().map(|t| t.accept), run.trials))
    } else {
        poq::run_protocol(prover, run.lambda, run.tcf, run.trials, run.seed).map_err(run_error)
    }
}

fn compiled_rate<P: CompiledProver>(
    compiled: &CompiledGame,
    prover: &P,
    name: &str,
    config: &CompilerConfig,
    run: &Run,
    sink: &mut Transcripts,
) -> Result<RateEstimate, CliError> {
    let options = SessionOptions::default();
    if sink.enabled() {
        let ts = compilers::run_transcripts(compiled, prover, config, options, run.trials, run.seed)
            .map_err(run_error)?;
        sink.write(name, &ts)?;
        Ok(accept_rate(ts.iter().map(|t| t.accept), run.trials))
    } else {
        compilers::estimate_win_rate(compiled, prover, config, options, run.trials, run.seed).map_err(run_error)
    }
}

fn formulas(kind: CompilerKind) -> (&'static str, &'static str) {
    match kind {
        CompilerKind::OneOne => ("(1+valQu)/2", "(1+valNC)/2"),
        CompilerKind::AllButNoneOne => ("valQu", "1-min_C Pr(C)/|C|"),
        CompilerKind::AllButOneOne => ("1-1/|C|+valQu/|C|", "1-1/|C|+valNC/|C|"),
    }
}

/// The strategy on qubit registers, as the homomorphic evaluation needs.
fn on_qubits(s: &QuantumStrategy) -> Result<QuantumStrategy, CliError> {
    if s.state().dims().iter().all(|&d| d == 2) {
        Ok(s.clone())
    } else {
        s.embed_in_qubits(0).map_err(run_error)
    }
}

pub fn compile(args: &CompileArgs) -> Result<Report, CliError> {
    let run = &args.run;
    let (want_honest, want_tt, want_feasible) = match args.prover.as_str() {
        "all" => (true, true, true),
        "honest" => (true, false, false),
        "truth-table" => (false, true, false),
        "feasible" => (false, false, true),
        other => {
            return Err(CliError::Config(format!(
                "unknown prover {other:?}; expected all, honest, truth-table, feasible"
            )))
        }
    };
    let loaded = load(&args.game)?;
    let game = loaded.game.pad_contexts();
    let strategy = loaded
        .strategy
        .as_ref()
        .map(|s| pad_strategy(&loaded.game, s))
        .transpose()
        .map_err(run_error)?;
    if want_honest && args.prover == "honest" && strategy.is_none() {
        return Err(CliError::Config(format!("game {:?} has no quantum strategy", args.game)));
    }
    let compiled = CompiledGame::new(&game, args.compiler).map_err(|e| CliError::Config(e.to_string()))?;
    let config = CompilerConfig {
        lambda: run.lambda,
        tcf: run.tcf,
        fhe: args.fhe,
        oracle: CompilerConfig::default().oracle,
    };
    let (complete, sound) = formulas(args.compiler);
    let soundness = soundness_bound(&compiled).map_err(run_error)?;
    let mut sink = Transcripts::open(run.transcripts.as_deref())?;
    let mut rows = vec![];
    if let (true, Some(s)) = (want_honest, &strategy) {
        let val_qu = s.value_in(&game).map_err(run_error)?;
        let prover = honest_quantum_prover(&compiled, &on_qubits(s)?).map_err(run_error)?;
        let rate = compiled_rate(&compiled, &prover, "honest", &config, run, &mut sink)?;
        rows.push(Row::estimate(
            "honest",
            "win_rate",
            &rate,
            completeness_bound(&compiled, val_qu),
            Relation::Ge,
            complete,
        ));
    }
    let tau = game.nc_value().map_err(run_error)?.table;
    if want_tt {
        let prover = truthtable_prover(&compiled, &tau).map_err(run_error)?;
        let rate = compiled_rate(&compiled, &prover, "truth-table", &config, run, &mut sink)?;
        rows.push(Row::estimate("truth-table", "win_rate", &rate, soundness, Relation::Le, sound));
    }
    if want_feasible {
        let prover = feasible_inconsistent_prover(&compiled, &tau).map_err(run_error)?;
        let rate = compiled_rate(&compiled, &prover, "feasible", &config, run, &mut sink)?;
        rows.push(Row::estimate("feasible", "win_rate", &rate, soundness, Relation::Le, sound));
    }
    sink.finish()?;
    let mut rc = run_config(run, &args.prover);
    rc.game = Some(args.game.clone());
    rc.compiler = Some(args.compiler.to_string());
    rc.fhe = Some(args.fhe.to_string());
    Ok(Report::new("compile", rc, rows))
}
