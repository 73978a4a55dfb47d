//! Running sessions, transcripts, win-rate estimates and the decision
//! faithfulness check.

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::games::Assignment;
use crate::mc::{derive_seed, run_trials, RateEstimate, SimRng};
use crate::opad::{OpadString, OracleMode, PhaseOracle};
use crate::qfhe::{ClassicalCiphertext, FheBackend, QfheSecretKey};
use crate::qsim::PauliKey;
use crate::tcf::{TcfBackend, TcfPublicKey};

use super::{
    decide, truthtable_prover, verifier_decide, verifier_message3, verifier_new, CompiledGame,
    CompiledProver, CompiledVerifierState, CompilerError, CompilerKind, DecisionRule, Result,
};

/// Cryptographic parameters of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerConfig {
    pub lambda: usize,
    pub tcf: TcfBackend,
    pub fhe: FheBackend,
    pub oracle: OracleMode,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        Self {
            lambda: 8,
            tcf: TcfBackend::Ideal,
            fhe: FheBackend::XorStub,
            oracle: OracleMode::Hash,
        }
    }
}

/// Verifier variations used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionOptions {
    pub rule: DecisionRule,
    /// Send a uniformly random key instead of the recovered one.
    pub uniform_k: bool,
}

/// Role of each transcript slot, in message order.
pub const TRANSCRIPT_ROLES: [&str; 8] = [
    "question_ciphertext",
    "opad_public_key",
    "answer_ciphertext",
    "qfhe_key_ciphertext",
    "pad_string",
    "question",
    "pad_key",
    "answer",
];

/// Every message of one session in order, plus the decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledTranscript {
    pub seed: u64,
    pub kind: CompilerKind,
    #[serde(rename = "t1_question_ciphertext")]
    pub question_ciphertext: ClassicalCiphertext,
    #[serde(rename = "t2_opad_public_key")]
    pub opad_public_key: TcfPublicKey,
    #[serde(rename = "t3_answer_ciphertext")]
    pub answer_ciphertext: ClassicalCiphertext,
    #[serde(rename = "t4_qfhe_key_ciphertext")]
    pub qfhe_key_ciphertext: ClassicalCiphertext,
    #[serde(rename = "t5_pad_string")]
    pub pad_string: OpadString,
    #[serde(rename = "t6_question")]
    pub question: usize,
    #[serde(rename = "t7_pad_key")]
    pub pad_key: PauliKey,
    #[serde(rename = "t8_answer")]
    pub answer: i64,
    pub accept: bool,
}

impl CompiledTranscript {
    /// Recompute the decision from the transcript and the QFHE secret key.
    pub fn recompute(
        &self,
        compiled: &CompiledGame,
        sk: &QfheSecretKey,
        rule: DecisionRule,
    ) -> Result<bool> {
        let set = bits::from_slice(&sk.dec_classical(&self.question_ciphertext)?) as usize;
        let s = compiled
            .sets()
            .get(set)
            .ok_or_else(|| CompilerError::Malformed(format!("question set {set} out of range")))?;
        let round1 = compiled.decode_answers(
            &sk.dec_classical(&self.answer_ciphertext)?,
            s.positions.len(),
        )?;
        let position = compiled
            .game()
            .context(s.context)
            .iter()
            .position(|&q| q == self.question)
            .ok_or_else(|| CompilerError::Malformed("question outside the context".into()))?;
        Ok(decide(compiled, rule, set, &round1, position, self.answer))
    }
}

/// One full session. The verifier state is returned for inspection.
pub fn run_session<'g, P: CompiledProver + ?Sized>(
    compiled: &'g CompiledGame,
    prover: &P,
    config: &CompilerConfig,
    options: SessionOptions,
    seed: u64,
    rng: &mut SimRng,
) -> Result<(CompiledTranscript, CompiledVerifierState<'g>)> {
    let mut oracle = PhaseOracle::new(config.oracle, rng);
    let (mut verifier, m1) = verifier_new(compiled, config, options, rng)?;
    let (m2, memory) = prover.round1(compiled, &m1, &mut oracle, rng)?;
    let m3 = verifier_message3(&mut verifier, &m2, &mut oracle, rng)?;
    let answer = prover.round2(compiled, memory, &m3, rng)?;
    let accept = verifier_decide(&mut verifier, answer)?;
    Ok((
        CompiledTranscript {
            seed,
            kind: compiled.kind(),
            question_ciphertext: m1.payload,
            opad_public_key: m1.opad_pk,
            answer_ciphertext: m2.answers,
            qfhe_key_ciphertext: m2.key_hat,
            pad_string: m2.pad_string,
            question: m3.question,
            pad_key: m3.key,
            answer,
            accept,
        },
        verifier,
    ))
}

/// `trials` seeded sessions in trial order. Session `t` replays from
/// `rng_from_seed(transcript.seed)`.
pub fn run_transcripts<P: CompiledProver + ?Sized>(
    compiled: &CompiledGame,
    prover: &P,
    config: &CompilerConfig,
    options: SessionOptions,
    trials: u64,
    seed: u64,
) -> Result<Vec<CompiledTranscript>> {
    run_trials(trials, seed, |t, rng| {
        run_session(compiled, prover, config, options, derive_seed(seed, t), rng).map(|(tr, _)| tr)
    })
}

/// Acceptance rate over `trials` seeded sessions.
pub fn estimate_win_rate<P: CompiledProver + ?Sized>(
    compiled: &CompiledGame,
    prover: &P,
    config: &CompilerConfig,
    options: SessionOptions,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    let accepted = run_trials(trials, seed, |t, rng| {
        run_session(compiled, prover, config, options, derive_seed(seed, t), rng)
            .map(|(tr, _)| tr.accept)
    })?;
    let wins = accepted.iter().filter(|&&a| a).count() as u64;
    Ok(RateEstimate::from_counts(wins, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    pub trials: u64,
    /// Sessions whose decoded questions covered a whole context.
    pub covered: u64,
    pub violations: u64,
}

impl FaithfulnessReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Run the truth-table prover for `tau` and check that every decision
/// equals the game predicate on `tau` when the decoded questions cover a
/// context, and is an accept otherwise.
pub fn decision_faithfulness_check(
    compiled: &CompiledGame,
    tau: &Assignment,
    config: &CompilerConfig,
    rule: DecisionRule,
    trials: u64,
    seed: u64,
) -> Result<FaithfulnessReport> {
    let prover = truthtable_prover(compiled, tau)?;
    let options = SessionOptions {
        rule,
        uniform_k: false,
    };
    let game = compiled.game();
    let outcomes = run_trials(trials, seed, |t, rng| {
        let (tr, v) = run_session(compiled, &prover, config, options, derive_seed(seed, t), rng)?;
        let covered = v.covers_context().expect("session is complete");
        let c = v.context();
        let expected = !covered || game.predicate(c, &tau.restrict(game.context(c)));
        Ok::<_, CompilerError>((covered, tr.accept == expected))
    })?;
    Ok(FaithfulnessReport {
        trials,
        covered: outcomes.iter().filter(|(c, _)| *c).count() as u64,
        violations: outcomes.iter().filter(|(_, ok)| !ok).count() as u64,
    })
}

/// Honest win probability promised for a strategy of value `val_qu`.
pub fn completeness_bound(compiled: &CompiledGame, val_qu: f64) -> f64 {
    let size = compiled.context_size() as f64;
    match compiled.kind() {
        CompilerKind::OneOne => 0.5 * (1.0 + val_qu),
        CompilerKind::AllButNoneOne => val_qu,
        CompilerKind::AllButOneOne => 1.0 - 1.0 / size + val_qu / size,
    }
}

/// Classical win probability bound, up to negligible terms.
pub fn soundness_bound(compiled: &CompiledGame) -> Result<f64> {
    let to_f64 = |w: crate::games::Weight| *w.numer() as f64 / *w.denom() as f64;
    let size = compiled.context_size() as f64;
    Ok(match compiled.kind() {
        CompilerKind::OneOne => 0.5 * (1.0 + to_f64(compiled.game().nc_value()?.value)),
        CompilerKind::AllButNoneOne => 1.0 - to_f64(compiled.game().min_weight_per_question()),
        CompilerKind::AllButOneOne => {
            1.0 - 1.0 / size + to_f64(compiled.game().nc_value()?.value) / size
        }
    })
}
