//! Rewinding reductions behind the compilers' soundness.
//!
//! A classical prover for a compiled game is rewound to read off a full
//! truth table for one round-1 input. Estimating the table distribution
//! per input yields a distinguisher for the question encryption whenever
//! two inputs induce different distributions: it wins the two-message
//! indistinguishability game with probability `1/2 + L1/4`, where `L1` is
//! the distance between the two distributions.
//!
//! The reduction only ever holds an [`EvalKey`] and a challenge
//! ciphertext; the pad keys it generates itself are never used to
//! decrypt, since every rewind is answered with a uniform Pauli key.

mod dind;
mod provers;
#[cfg(test)]
mod tests;

pub use dind::{dind_prime_game, LeakMatcher, MessageDistinguisher, MostLikely, UniformGuess};
pub use provers::QuestionDependentProver;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::compilers::{
    CompiledGame, CompiledProver, CompilerConfig, CompilerError, Message1, Message2, Message3,
    TableProver,
};
use crate::games::Assignment;
use crate::mc::{derive_seed, rng_from_seed, run_trials, RateEstimate, SimRng};
use crate::opad::{self, OracleMode, PhaseOracle};
use crate::qfhe::{twoind_game, ClassicalCiphertext, Distinguisher, EvalKey, QfheError, QfheSecretKey};
use crate::qsim::PauliKey;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error("prover answered differently when replayed")]
    NotReplayable,
    #[error("need at least two round-1 inputs, got {0}")]
    TooFewInputs(usize),
    #[error("round-1 input {input} out of range for {sets} sets")]
    InputOutOfRange { input: usize, sets: usize },
    #[error("malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Compiler(#[from] CompilerError),
    #[error(transparent)]
    Qfhe(#[from] QfheError),
}

impl From<opad::OpadError> for ReductionError {
    fn from(e: opad::OpadError) -> Self {
        Self::Compiler(e.into())
    }
}

pub type Result<T> = std::result::Result<T, ReductionError>;

/// A classical prover whose round-1 memory can be copied, so round 2 can be
/// replayed from a frozen snapshot. Quantum provers do not implement it.
pub trait ReplayableProver: CompiledProver<Memory: Clone> {}

impl ReplayableProver for TableProver {}

/// Rewind `prover` on a fixed message 1 and collect its answer to every
/// question, each asked with a fresh uniform key.
///
/// Round 1 runs from `seed`; the round-2 replay for question `q` runs from
/// `derive_seed(seed, q + 1)`. Both are executed twice and must agree.
pub fn extract_from_message<P: ReplayableProver + ?Sized>(
    prover: &P,
    compiled: &CompiledGame,
    message: &Message1,
    oracle: OracleMode,
    seed: u64,
) -> Result<Assignment> {
    let round1 = || -> Result<(Message2, P::Memory)> {
        let mut rng = rng_from_seed(seed);
        let mut oracle = PhaseOracle::new(oracle, &mut rng);
        Ok(prover.round1(compiled, message, &mut oracle, &mut rng)?)
    };
    let (m2, memory) = round1()?;
    if round1()?.0 != m2 {
        return Err(ReductionError::NotReplayable);
    }
    let qubits = m2.pad_string.0.len();
    (0..compiled.game().questions().len())
        .map(|q| {
            let mut rng = rng_from_seed(derive_seed(seed, q as u64 + 1));
            let m3 = Message3 {
                question: q,
                key: PauliKey::random(qubits, &mut rng),
            };
            let replay = || prover.round2(compiled, memory.clone(), &m3, &mut rng.clone());
            let a = replay()?;
            if replay()? != a {
                return Err(ReductionError::NotReplayable);
            }
            Ok(a)
        })
        .collect::<Result<Vec<_>>>()
        .map(Assignment)
}

fn check_input(compiled: &CompiledGame, input: usize) -> Result<()> {
    if input >= compiled.sets().len() {
        return Err(ReductionError::InputOutOfRange {
            input,
            sets: compiled.sets().len(),
        });
    }
    Ok(())
}

fn input_bits(compiled: &CompiledGame, input: usize) -> Vec<bool> {
    bits::to_vec(input as u64, compiled.payload_bits())
}

fn message1<R: Rng + ?Sized>(
    ek: EvalKey,
    payload: ClassicalCiphertext,
    config: &CompilerConfig,
    rng: &mut R,
) -> Result<Message1> {
    let keys = opad::gen(config.lambda, config.tcf, rng)?;
    Ok(Message1 {
        payload,
        opad_pk: keys.pk,
        eval_key: ek,
    })
}

/// Extract one table for round-1 input `input`, under keys the extractor
/// generates itself.
pub fn extract_truthtable<P: ReplayableProver + ?Sized>(
    prover: &P,
    compiled: &CompiledGame,
    input: usize,
    config: &CompilerConfig,
    seed: u64,
) -> Result<Assignment> {
    check_input(compiled, input)?;
    let mut rng = rng_from_seed(seed);
    let sk = QfheSecretKey::gen(config.lambda, config.fhe, &mut rng)?;
    let payload = sk.enc_classical(&input_bits(compiled, input), &mut rng);
    let m1 = message1(sk.eval_key(), payload, config, &mut rng)?;
    extract_from_message(prover, compiled, &m1, config.oracle, rng.random())
}

/// Trials needed for the estimated distributions to be `eps`-close.
pub fn precision_trials(eps: f64) -> u64 {
    (16.0 / eps.powi(3)).ceil() as u64
}

/// Observed table counts for one round-1 input, sorted by table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputTables {
    pub input: usize,
    pub counts: Vec<(Assignment, u64)>,
}

/// Empirical distribution of extracted tables, per round-1 input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTableDistribution {
    pub trials: u64,
    pub inputs: Vec<InputTables>,
}

impl ConditionalTableDistribution {
    /// Frequencies for the `k`-th estimated input; they sum to 1.
    pub fn frequencies(&self, k: usize) -> BTreeMap<Assignment, f64> {
        self.inputs[k]
            .counts
            .iter()
            .map(|(t, n)| (t.clone(), *n as f64 / self.trials as f64))
            .collect()
    }

    pub fn l1(&self, a: usize, b: usize) -> f64 {
        l1_distance(&self.frequencies(a), &self.frequencies(b))
    }
}

/// `sum_tau |p(tau) - q(tau)|` over the union of supports.
pub fn l1_distance(p: &BTreeMap<Assignment, f64>, q: &BTreeMap<Assignment, f64>) -> f64 {
    let support: BTreeSet<&Assignment> = p.keys().chain(q.keys()).collect();
    support
        .into_iter()
        .map(|t| (p.get(t).unwrap_or(&0.0) - q.get(t).unwrap_or(&0.0)).abs())
        .sum()
}

/// Extract `trials` tables for each input in `inputs`. Input `k` uses the
/// trial stream of `derive_seed(seed, k)`.
pub fn estimate_table_distributions<P: ReplayableProver + ?Sized>(
    prover: &P,
    compiled: &CompiledGame,
    inputs: &[usize],
    config: &CompilerConfig,
    trials: u64,
    seed: u64,
) -> Result<ConditionalTableDistribution> {
    let inputs = inputs
        .iter()
        .enumerate()
        .map(|(k, &input)| {
            check_input(compiled, input)?;
            let tables = run_trials(trials, derive_seed(seed, k as u64), |_, rng| {
                extract_truthtable(prover, compiled, input, config, rng.random())
            })?;
            let mut counts = BTreeMap::<Assignment, u64>::new();
            for t in tables {
                *counts.entry(t).or_default() += 1;
            }
            Ok(InputTables {
                input,
                counts: counts.into_iter().collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalTableDistribution { trials, inputs })
}

/// Two round-1 inputs and a partition of observed tables. A table in `t1`
/// is attributed to `input1`; every other table, including unseen ones, to
/// `input0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherPlan {
    pub input0: usize,
    pub input1: usize,
    pub t0: BTreeSet<Assignment>,
    pub t1: BTreeSet<Assignment>,
    /// Estimated L1 distance between the two inputs' distributions.
    pub l1: f64,
}

impl DistinguisherPlan {
    /// True when the estimated distributions coincide.
    pub fn useless(&self) -> bool {
        self.l1 < 1e-12
    }

    pub fn guess(&self, table: &Assignment) -> bool {
        self.t1.contains(table)
    }

    /// Exact win probability of this plan against provers whose per-input
    /// distributions are `p0` and `p1`.
    pub fn win_probability(&self, p0: &BTreeMap<Assignment, f64>, p1: &BTreeMap<Assignment, f64>) -> f64 {
        let mass = |p: &BTreeMap<Assignment, f64>| -> f64 {
            p.iter().filter(|(t, _)| !self.guess(t)).map(|(_, w)| w).sum()
        };
        0.5 + 0.5 * (mass(p0) - mass(p1))
    }
}

/// Pick the pair of inputs at maximal estimated L1 distance (first pair on
/// ties) and split tables by which input makes them likelier, ties to `t0`.
pub fn build_distinguisher(dist: &ConditionalTableDistribution) -> Result<DistinguisherPlan> {
    let n = dist.inputs.len();
    if n < 2 {
        return Err(ReductionError::TooFewInputs(n));
    }
    let (mut best, mut best_l1) = ((0, 1), f64::NEG_INFINITY);
    for a in 0..n {
        for b in a + 1..n {
            let l1 = dist.l1(a, b);
            if l1 > best_l1 + 1e-12 {
                best = (a, b);
                best_l1 = l1;
            }
        }
    }
    let (p0, p1) = (dist.frequencies(best.0), dist.frequencies(best.1));
    let (t0, t1) = p0
        .keys()
        .chain(p1.keys())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .partition(|t| p0.get(t).unwrap_or(&0.0) >= p1.get(t).unwrap_or(&0.0));
    Ok(DistinguisherPlan {
        input0: dist.inputs[best.0].input,
        input1: dist.inputs[best.1].input,
        t0,
        t1,
        l1: best_l1,
    })
}

/// The second-phase distinguisher: builds message 1 around the challenge,
/// rewinds the prover for a table and classifies it with the plan.
pub struct A2Distinguisher<'a, P: ?Sized> {
    prover: &'a P,
    compiled: &'a CompiledGame,
    plan: &'a DistinguisherPlan,
    config: CompilerConfig,
    failure: Option<ReductionError>,
}

impl<'a, P: ReplayableProver + ?Sized> A2Distinguisher<'a, P> {
    pub fn new(
        prover: &'a P,
        compiled: &'a CompiledGame,
        plan: &'a DistinguisherPlan,
        config: CompilerConfig,
    ) -> Self {
        Self {
            prover,
            compiled,
            plan,
            config,
            failure: None,
        }
    }

    fn try_guess(&self, ek: &EvalKey, challenge: &ClassicalCiphertext, rng: &mut SimRng) -> Result<bool> {
        let m1 = message1(ek.clone(), challenge.clone(), &self.config, rng)?;
        let table = extract_from_message(self.prover, self.compiled, &m1, self.config.oracle, rng.random())?;
        Ok(self.plan.guess(&table))
    }
}

impl<P: ReplayableProver + ?Sized> Distinguisher for A2Distinguisher<'_, P> {
    fn guess(
        &mut self,
        ek: &EvalKey,
        challenge: &ClassicalCiphertext,
        rng: &mut SimRng,
    ) -> std::result::Result<bool, QfheError> {
        self.try_guess(ek, challenge, rng).map_err(|e| {
            self.failure = Some(e);
            QfheError::Aborted
        })
    }
}

/// Play the two-message indistinguishability game on the plan's inputs.
pub fn run_a2_reduction<P: ReplayableProver + ?Sized>(
    prover: &P,
    compiled: &CompiledGame,
    plan: &DistinguisherPlan,
    config: &CompilerConfig,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    check_input(compiled, plan.input0)?;
    check_input(compiled, plan.input1)?;
    let mut d = A2Distinguisher::new(prover, compiled, plan, *config);
    let outcome = twoind_game(
        &mut d,
        config.fhe,
        config.lambda,
        &input_bits(compiled, plan.input0),
        &input_bits(compiled, plan.input1),
        trials,
        &mut rng_from_seed(seed),
    );
    match (outcome, d.failure) {
        (_, Some(e)) => Err(e),
        (r, None) => Ok(r?),
    }
}

/// Both phases of the reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    pub distribution: ConditionalTableDistribution,
    pub plan: DistinguisherPlan,
    pub rate: RateEstimate,
}

/// Learn the distributions on every round-1 input, then play the game.
pub fn a2_reduction<P: ReplayableProver + ?Sized>(
    prover: &P,
    compiled: &CompiledGame,
    config: &CompilerConfig,
    learn_trials: u64,
    game_trials: u64,
    seed: u64,
) -> Result<A2Report> {
    let inputs: Vec<usize> = (0..compiled.sets().len()).collect();
    let distribution =
        estimate_table_distributions(prover, compiled, &inputs, config, learn_trials, derive_seed(seed, 0))?;
    let plan = build_distinguisher(&distribution)?;
    let rate = run_a2_reduction(prover, compiled, &plan, config, game_trials, derive_seed(seed, 1))?;
    Ok(A2Report {
        distribution,
        plan,
        rate,
    })
}
