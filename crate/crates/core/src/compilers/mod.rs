//! Compilers from contextuality games to single-prover interactive tests.
//!
//! All three compilers share one four-message shape. The verifier sends an
//! encrypted round-1 question set and an oblivious-pad public key. The
//! prover answers under encryption, pads its post-measurement state, and
//! returns `(answers, k'', s')`. The verifier recovers the combined pad `k`,
//! asks one question `q` in the clear together with `k`, and checks the
//! answer against the decrypted round-1 answers. The kinds differ only in
//! which questions round 1 covers:
//!
//! - [`CompilerKind::OneOne`]: one question of a size-2 context.
//! - [`CompilerKind::AllButNoneOne`]: the whole context.
//! - [`CompilerKind::AllButOneOne`]: the context minus a uniform `q_skip`.

mod provers;
mod session;

pub use provers::{
    feasible_inconsistent_prover, honest_quantum_prover, truthtable_prover, CompiledProver,
    HonestCompiledProver, TableProver, CLASSICAL_PAD_QUBITS,
};
pub use session::{
    completeness_bound, decision_faithfulness_check, estimate_win_rate, run_session,
    run_transcripts, soundness_bound, CompiledTranscript, CompilerConfig, FaithfulnessReport,
    SessionOptions, TRANSCRIPT_ROLES,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::games::{ContextualityGame, GameError};
use crate::opad::{self, OpadError, OpadString, PhaseOracle};
use crate::qfhe::{ClassicalCiphertext, EvalKey, QfheError, QfheSecretKey};
use crate::qsim::{PauliKey, QsimError};
use crate::tcf::{TcfError, TcfKeyPair, TcfPublicKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompilerError {
    #[error("compiler {kind} cannot compile this game: {reason}")]
    IncompatibleKind { kind: CompilerKind, reason: String },
    #[error("verifier expected {expected:?}, session is at {found:?}")]
    OutOfOrder { expected: Stage, found: Stage },
    #[error("malformed prover message: {0}")]
    Malformed(String),
    #[error("context {0} has no accepted answer tuple")]
    NoSatisfyingTuple(usize),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Qfhe(#[from] QfheError),
    #[error(transparent)]
    Opad(#[from] OpadError),
    #[error(transparent)]
    Tcf(#[from] TcfError),
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, CompilerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompilerKind {
    #[serde(rename = "1-1")]
    OneOne,
    #[serde(rename = "c-1")]
    AllButNoneOne,
    #[serde(rename = "cm1-1")]
    AllButOneOne,
}

impl CompilerKind {
    pub const ALL: [CompilerKind; 3] = [Self::OneOne, Self::AllButNoneOne, Self::AllButOneOne];

    pub fn name(self) -> &'static str {
        match self {
            Self::OneOne => "1-1",
            Self::AllButNoneOne => "c-1",
            Self::AllButOneOne => "cm1-1",
        }
    }
}

impl fmt::Display for CompilerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompilerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown compiler '{s}' (expected 1-1, c-1 or cm1-1)"))
    }
}

/// Questions asked under encryption in round 1: `positions` index into
/// context `context`, in context order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOneSet {
    pub context: usize,
    pub positions: Vec<usize>,
}

/// A game prepared for one compiler kind. The round-1 payload is the index
/// of a [`RoundOneSet`], encrypted in `payload_bits` bits; answers travel
/// as label indices of `label_bits` bits each.
#[derive(Debug, Clone)]
pub struct CompiledGame {
    game: ContextualityGame,
    kind: CompilerKind,
    context_size: usize,
    sets: Vec<RoundOneSet>,
    payload_bits: usize,
    label_bits: usize,
}

impl CompiledGame {
    /// Contexts must share one size: 2 for `OneOne`, and at least 2 for
    /// `AllButOneOne`. Games with ragged contexts can be brought into shape
    /// with [`ContextualityGame::pad_contexts`].
    pub fn new(game: &ContextualityGame, kind: CompilerKind) -> Result<Self> {
        let incompatible = |reason: &str| CompilerError::IncompatibleKind {
            kind,
            reason: reason.to_string(),
        };
        let size = game
            .uniform_context_size()
            .ok_or_else(|| incompatible("contexts differ in size; pad them first"))?;
        match kind {
            CompilerKind::OneOne if size != 2 => return Err(incompatible("contexts must have size 2")),
            CompilerKind::AllButOneOne if size < 2 => {
                return Err(incompatible("contexts must have at least 2 questions"))
            }
            _ => {}
        }
        let sets: Vec<RoundOneSet> = (0..game.contexts().len())
            .flat_map(|c| -> Vec<RoundOneSet> {
                match kind {
                    CompilerKind::OneOne => (0..size)
                        .map(|j| RoundOneSet {
                            context: c,
                            positions: vec![j],
                        })
                        .collect(),
                    CompilerKind::AllButNoneOne => vec![RoundOneSet {
                        context: c,
                        positions: (0..size).collect(),
                    }],
                    CompilerKind::AllButOneOne => (0..size)
                        .map(|skip| RoundOneSet {
                            context: c,
                            positions: (0..size).filter(|&j| j != skip).collect(),
                        })
                        .collect(),
                }
            })
            .collect();
        Ok(Self {
            game: game.clone(),
            kind,
            context_size: size,
            payload_bits: bits::width_for(sets.len()),
            label_bits: bits::width_for(game.answers().len()),
            sets,
        })
    }

    pub fn game(&self) -> &ContextualityGame {
        &self.game
    }

    pub fn kind(&self) -> CompilerKind {
        self.kind
    }

    pub fn context_size(&self) -> usize {
        self.context_size
    }

    pub fn sets(&self) -> &[RoundOneSet] {
        &self.sets
    }

    pub fn payload_bits(&self) -> usize {
        self.payload_bits
    }

    pub fn label_bits(&self) -> usize {
        self.label_bits
    }

    /// Questions of a round-1 set, in context order.
    pub fn set_questions(&self, set: usize) -> Vec<usize> {
        let s = &self.sets[set];
        let ctx = self.game.context(s.context);
        s.positions.iter().map(|&j| ctx[j]).collect()
    }

    /// Set index of `context` with the given round-1 positions.
    fn set_index(&self, context: usize, positions: &[usize]) -> usize {
        self.sets
            .iter()
            .position(|s| s.context == context && s.positions == positions)
            .expect("sets enumerate every (context, positions) the verifier samples")
    }

    /// Encode answers as concatenated label indices.
    pub fn encode_answers(&self, answers: &[i64]) -> Result<Vec<bool>> {
        let mut out = Vec::with_capacity(answers.len() * self.label_bits);
        for &a in answers {
            let idx = self
                .game
                .answer_index(a)
                .ok_or_else(|| CompilerError::Malformed(format!("answer {a} is not a label")))?;
            out.extend(bits::to_vec(idx as u64, self.label_bits));
        }
        Ok(out)
    }

    /// Inverse of [`CompiledGame::encode_answers`].
    pub fn decode_answers(&self, encoded: &[bool], count: usize) -> Result<Vec<i64>> {
        if encoded.len() != count * self.label_bits {
            return Err(CompilerError::Malformed(format!(
                "expected {} answer bits, got {}",
                count * self.label_bits,
                encoded.len()
            )));
        }
        encoded
            .chunks(self.label_bits)
            .map(|chunk| {
                let idx = bits::from_slice(chunk) as usize;
                self.game
                    .answers()
                    .get(idx)
                    .copied()
                    .ok_or_else(|| CompilerError::Malformed(format!("label index {idx} out of range")))
            })
            .collect()
    }
}

/// Position of the verifier in the message sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    AwaitMessage2,
    AwaitMessage4,
    Complete,
}

/// `(c_{q'}, opad.pk)` plus the public evaluation handle.
#[derive(Debug, Clone)]
pub struct Message1 {
    pub payload: ClassicalCiphertext,
    pub opad_pk: TcfPublicKey,
    pub eval_key: EvalKey,
}

/// `(c_{a'}, k''-hat, s')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message2 {
    pub answers: ClassicalCiphertext,
    pub key_hat: ClassicalCiphertext,
    pub pad_string: OpadString,
}

/// `(q, k)`, sent in the clear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message3 {
    pub question: usize,
    pub key: PauliKey,
}

/// How the verifier turns answers into a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionRule {
    #[default]
    Faithful,
    /// Negative control: rejects whenever the consistency check applies.
    RejectOnConsistency,
}

/// Verifier side of one session.
#[derive(Debug, Clone)]
pub struct CompiledVerifierState<'g> {
    compiled: &'g CompiledGame,
    rule: DecisionRule,
    uniform_k: bool,
    qfhe_sk: QfheSecretKey,
    opad_keys: TcfKeyPair,
    set: usize,
    stage: Stage,
    round1_answers: Option<Vec<i64>>,
    key_parts: Option<(PauliKey, PauliKey)>,
    question_position: Option<usize>,
    key: Option<PauliKey>,
    answer: Option<i64>,
}

/// Sample the context and round-1 set, and build message 1.
pub fn verifier_new<'g, R: Rng + ?Sized>(
    compiled: &'g CompiledGame,
    config: &CompilerConfig,
    options: SessionOptions,
    rng: &mut R,
) -> Result<(CompiledVerifierState<'g>, Message1)> {
    let qfhe_sk = QfheSecretKey::gen(config.lambda, config.fhe, rng)?;
    let context = compiled.game.sample_context(rng);
    let size = compiled.context_size;
    let positions: Vec<usize> = match compiled.kind {
        CompilerKind::OneOne => vec![rng.random_range(0..size)],
        CompilerKind::AllButNoneOne => (0..size).collect(),
        CompilerKind::AllButOneOne => {
            let skip = rng.random_range(0..size);
            (0..size).filter(|&j| j != skip).collect()
        }
    };
    let set = compiled.set_index(context, &positions);
    let payload = qfhe_sk.enc_classical(&bits::to_vec(set as u64, compiled.payload_bits), rng);
    let opad_keys = opad::gen(config.lambda, config.tcf, rng)?;
    let message = Message1 {
        payload,
        opad_pk: opad_keys.pk.clone(),
        eval_key: qfhe_sk.eval_key(),
    };
    Ok((
        CompiledVerifierState {
            compiled,
            rule: options.rule,
            uniform_k: options.uniform_k,
            qfhe_sk,
            opad_keys,
            set,
            stage: Stage::AwaitMessage2,
            round1_answers: None,
            key_parts: None,
            question_position: None,
            key: None,
            answer: None,
        },
        message,
    ))
}

/// Decrypt message 2, combine the pads and ask `q`.
pub fn verifier_message3<R: Rng + ?Sized>(
    state: &mut CompiledVerifierState<'_>,
    message: &Message2,
    oracle: &mut PhaseOracle,
    rng: &mut R,
) -> Result<Message3> {
    state.expect(Stage::AwaitMessage2)?;
    let compiled = state.compiled;
    let asked = compiled.sets[state.set].positions.len();
    let plain = state.qfhe_sk.dec_classical(&message.answers)?;
    let answers = compiled.decode_answers(&plain, asked)?;
    let k2 = PauliKey::from_bits(&state.qfhe_sk.dec_classical(&message.key_hat)?)?;
    let k1 = opad::dec(&state.opad_keys.sk, &message.pad_string, oracle)?;
    if k1.len() != k2.len() {
        return Err(CompilerError::Malformed(format!(
            "pad string covers {} qubits, QFHE key covers {}",
            k1.len(),
            k2.len()
        )));
    }
    let combined = k1.compose(&k2)?;
    // Always draw, so both key modes consume the same randomness.
    let uniform = PauliKey::random(combined.len(), rng);
    let key = if state.uniform_k { uniform } else { combined };
    let position = rng.random_range(0..compiled.context_size);
    let question = compiled.game.context(compiled.sets[state.set].context)[position];
    state.round1_answers = Some(answers);
    state.key_parts = Some((k1, k2));
    state.question_position = Some(position);
    state.key = Some(key.clone());
    state.stage = Stage::AwaitMessage4;
    Ok(Message3 { question, key })
}

/// Final decision on the round-2 answer `a`.
pub fn verifier_decide(state: &mut CompiledVerifierState<'_>, a: i64) -> Result<bool> {
    state.expect(Stage::AwaitMessage4)?;
    state.answer = Some(a);
    state.stage = Stage::Complete;
    let round1 = state.round1_answers.as_deref().expect("set with message 3");
    let position = state.question_position.expect("set with message 3");
    Ok(decide(
        state.compiled,
        state.rule,
        state.set,
        round1,
        position,
        a,
    ))
}

/// The kind-specific decision. `round1` holds answers for the set's
/// positions; `position` is where `q` sits in the context.
pub fn decide(
    compiled: &CompiledGame,
    rule: DecisionRule,
    set: usize,
    round1: &[i64],
    position: usize,
    a: i64,
) -> bool {
    let s = &compiled.sets[set];
    let consistency = |ok: bool| match rule {
        DecisionRule::Faithful => ok,
        DecisionRule::RejectOnConsistency => false,
    };
    let full = |filled: Vec<i64>| compiled.game.predicate(s.context, &filled);
    match s.positions.iter().position(|&j| j == position) {
        Some(i) if compiled.kind == CompilerKind::AllButNoneOne => {
            full(round1.to_vec()) && consistency(round1[i] == a)
        }
        Some(i) => consistency(round1[i] == a),
        None => {
            let mut filled = vec![0; compiled.context_size];
            for (&j, &ans) in s.positions.iter().zip(round1) {
                filled[j] = ans;
            }
            filled[position] = a;
            full(filled)
        }
    }
}

impl<'g> CompiledVerifierState<'g> {
    fn expect(&self, expected: Stage) -> Result<()> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(CompilerError::OutOfOrder {
                expected,
                found: self.stage,
            })
        }
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn compiled(&self) -> &'g CompiledGame {
        self.compiled
    }

    pub fn qfhe_secret(&self) -> &QfheSecretKey {
        &self.qfhe_sk
    }

    pub fn opad_keys(&self) -> &TcfKeyPair {
        &self.opad_keys
    }

    /// Index of the sampled round-1 set.
    pub fn round1_set(&self) -> usize {
        self.set
    }

    pub fn context(&self) -> usize {
        self.compiled.sets[self.set].context
    }

    pub fn round1_answers(&self) -> Option<&[i64]> {
        self.round1_answers.as_deref()
    }

    /// `(k', k'')` as recovered from the pad string and the QFHE key.
    pub fn key_parts(&self) -> Option<&(PauliKey, PauliKey)> {
        self.key_parts.as_ref()
    }

    pub fn key(&self) -> Option<&PauliKey> {
        self.key.as_ref()
    }

    pub fn question_position(&self) -> Option<usize> {
        self.question_position
    }

    /// Whether round 1 together with `q` covers the whole context.
    pub fn covers_context(&self) -> Option<bool> {
        let position = self.question_position?;
        let s = &self.compiled.sets[self.set];
        Some(self.compiled.kind == CompilerKind::AllButNoneOne || !s.positions.contains(&position))
    }
}

#[cfg(test)]
mod tests;
