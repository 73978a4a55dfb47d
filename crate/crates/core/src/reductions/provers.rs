//! White-box classical provers whose tables depend on the round-1 input.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bits;
use crate::compilers::{
    CompiledGame, CompiledProver, CompilerError, Message1, Message2, Message3, CLASSICAL_PAD_QUBITS,
};
use crate::games::Assignment;
use crate::mc::SimRng;
use crate::opad::{self, PhaseOracle};

use super::{ReductionError, ReplayableProver, Result};

/// Reads the round-1 input by breaking the question encryption, then draws
/// its table from a known per-input distribution. Round 1 answers with the
/// table on the asked questions, so it is always consistent.
///
/// Such a prover is unbounded; it exists to check the reduction against
/// exactly known conditional distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionDependentProver {
    per_input: Vec<Vec<(Assignment, f64)>>,
}

impl QuestionDependentProver {
    /// One weighted table list per round-1 input. Weights are nonnegative
    /// and sum to 1 within `1e-9`.
    pub fn new(compiled: &CompiledGame, per_input: Vec<Vec<(Assignment, f64)>>) -> Result<Self> {
        let game = compiled.game();
        if per_input.len() != compiled.sets().len() {
            return Err(ReductionError::Malformed(format!(
                "{} distributions for {} round-1 inputs",
                per_input.len(),
                compiled.sets().len()
            )));
        }
        for (i, row) in per_input.iter().enumerate() {
            let total: f64 = row.iter().map(|(_, w)| w).sum();
            if row.iter().any(|(_, w)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(ReductionError::Malformed(format!(
                    "weights for input {i} do not form a distribution"
                )));
            }
            for (t, _) in row {
                if t.0.len() != game.questions().len()
                    || t.0.iter().any(|a| game.answer_index(*a).is_none())
                {
                    return Err(ReductionError::Malformed(format!("bad table {t:?}")));
                }
            }
        }
        Ok(Self { per_input })
    }

    /// Input `i` always yields a table built from the bits of `i`, so the
    /// tables of distinct inputs differ.
    pub fn leaking(compiled: &CompiledGame) -> Result<Self> {
        let game = compiled.game();
        let (q, answers) = (game.questions().len(), game.answers());
        let sets = compiled.sets().len();
        if answers.len() < 2 || q < bits::width_for(sets) {
            return Err(ReductionError::Malformed(
                "not enough tables to tell every input apart".into(),
            ));
        }
        let rows = (0..sets)
            .map(|i| {
                let t = (0..q).map(|j| answers[usize::from(bits::bit(i as u64, q, j))]).collect();
                vec![(Assignment(t), 1.0)]
            })
            .collect();
        Self::new(compiled, rows)
    }

    /// Mixture of two tables, `a` with probability `weight_a[i]` on input `i`.
    pub fn two_tables(
        compiled: &CompiledGame,
        a: &Assignment,
        b: &Assignment,
        weight_a: &[f64],
    ) -> Result<Self> {
        let rows = weight_a
            .iter()
            .map(|&w| vec![(a.clone(), w), (b.clone(), 1.0 - w)])
            .collect();
        Self::new(compiled, rows)
    }

    /// Exact table distribution on input `i`, duplicates merged and zero
    /// weights dropped.
    pub fn distribution(&self, input: usize) -> BTreeMap<Assignment, f64> {
        let mut out = BTreeMap::new();
        for (t, w) in self.per_input[input].iter().filter(|(_, w)| *w > 0.0) {
            *out.entry(t.clone()).or_insert(0.0) += w;
        }
        out
    }

    pub fn inputs(&self) -> usize {
        self.per_input.len()
    }

    fn sample(&self, input: usize, rng: &mut SimRng) -> Assignment {
        let row = &self.per_input[input];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (t, w) in row {
            acc += w;
            if u < acc {
                return t.clone();
            }
        }
        row.iter().rev().find(|(_, w)| *w > 0.0).map_or_else(|| row[0].0.clone(), |(t, _)| t.clone())
    }
}

impl CompiledProver for QuestionDependentProver {
    type Memory = Assignment;

    fn round1(
        &self,
        compiled: &CompiledGame,
        message: &Message1,
        _: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> std::result::Result<(Message2, Assignment), CompilerError> {
        let ek = &message.eval_key;
        let input = bits::from_slice(&ek.unbounded_decrypt(&message.payload)?) as usize;
        if input >= self.per_input.len() {
            return Err(CompilerError::Malformed(format!("round-1 input {input} out of range")));
        }
        let table = self.sample(input, rng);
        let asked: Vec<i64> = compiled.set_questions(input).iter().map(|&q| table.0[q]).collect();
        let answers = ek.encrypt(&compiled.encode_answers(&asked)?, rng);
        let key_bits: Vec<bool> = (0..2 * CLASSICAL_PAD_QUBITS).map(|_| rng.random()).collect();
        let key_hat = ek.encrypt(&key_bits, rng);
        let pad_string = opad::samp(&message.opad_pk, CLASSICAL_PAD_QUBITS, rng)?;
        Ok((
            Message2 {
                answers,
                key_hat,
                pad_string,
            },
            table,
        ))
    }

    fn round2(
        &self,
        _: &CompiledGame,
        table: Assignment,
        message: &Message3,
        _: &mut SimRng,
    ) -> std::result::Result<i64, CompilerError> {
        table
            .0
            .get(message.question)
            .copied()
            .ok_or_else(|| CompilerError::Malformed(format!("unknown question {}", message.question)))
    }
}

impl ReplayableProver for QuestionDependentProver {}
