//! Provers for compiled games.

use rand::Rng;

use crate::bits;
use crate::games::{Assignment, QuantumStrategy};
use crate::mc::SimRng;
use crate::opad::{self, PhaseOracle};
use crate::qfhe::{ClassicalCircuit, QCircuit, QOp, QfheError};
use crate::qsim::StateVector;

use super::{CompiledGame, CompilerError, Message1, Message2, Message3, Result};

/// A prover as seen by the session driver. `Memory` is carried from the
/// first answer to the second and consumed there.
pub trait CompiledProver: Sync {
    type Memory;

    fn round1(
        &self,
        compiled: &CompiledGame,
        message: &Message1,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<(Message2, Self::Memory)>;

    fn round2(
        &self,
        compiled: &CompiledGame,
        memory: Self::Memory,
        message: &Message3,
        rng: &mut SimRng,
    ) -> Result<i64>;
}

/// Measures the strategy's observables under encryption, pads the
/// post-measurement state obliviously, and in round 2 measures the
/// observable conjugated by the announced key on the still-padded state.
#[derive(Debug, Clone)]
pub struct HonestCompiledProver {
    strategy: QuantumStrategy,
    circuit: QCircuit,
}

/// The strategy must act on qubits and be valid for the compiled game.
pub fn honest_quantum_prover(
    compiled: &CompiledGame,
    strategy: &QuantumStrategy,
) -> Result<HonestCompiledProver> {
    strategy.validate(compiled.game())?;
    if strategy.state().dims().iter().any(|&d| d != 2) {
        return Err(QfheError::NonQubit.into());
    }
    let branches = (0..compiled.sets().len())
        .map(|i| {
            compiled
                .set_questions(i)
                .into_iter()
                .map(|q| strategy.observable(q).clone())
                .collect()
        })
        .collect();
    let circuit = QCircuit::new(
        compiled.payload_bits(),
        vec![QOp::MeasureSelected {
            selector: (0..compiled.payload_bits()).collect(),
            branches,
            targets: strategy.all_registers(),
            labels: compiled.game().answers().to_vec(),
        }],
    )?;
    Ok(HonestCompiledProver {
        strategy: strategy.clone(),
        circuit,
    })
}

impl HonestCompiledProver {
    pub fn strategy(&self) -> &QuantumStrategy {
        &self.strategy
    }
}

impl CompiledProver for HonestCompiledProver {
    type Memory = StateVector;

    fn round1(
        &self,
        _: &CompiledGame,
        message: &Message1,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<(Message2, StateVector)> {
        let ek = &message.eval_key;
        let ct = ek.enc_quantum(self.strategy.state(), rng)?;
        let out = ek.eval(&self.circuit, &message.payload, &ct, rng)?;
        let targets = self.strategy.all_registers();
        let (held, pad_string) = opad::enc(
            &message.opad_pk,
            out.ciphertext.padded_state(),
            &targets,
            oracle,
            rng,
        )?;
        Ok((
            Message2 {
                answers: out.outputs,
                key_hat: out.ciphertext.pad_hat().clone(),
                pad_string,
            },
            held,
        ))
    }

    fn round2(
        &self,
        _: &CompiledGame,
        held: StateVector,
        message: &Message3,
        rng: &mut SimRng,
    ) -> Result<i64> {
        let observable = self
            .strategy
            .observables()
            .get(message.question)
            .ok_or_else(|| CompilerError::Malformed(format!("unknown question {}", message.question)))?
            .conjugated(&message.key.matrix());
        let (value, _) = held.measure_observable(&observable, &self.strategy.all_registers(), rng)?;
        Ok(value.round() as i64)
    }
}

/// Classical prover answering round 1 from a lookup table evaluated under
/// encryption and round 2 from a fixed assignment. It sends a uniformly
/// random encrypted key and a range-sampled pad string, and ignores `k`.
#[derive(Debug, Clone)]
pub struct TableProver {
    round1: ClassicalCircuit,
    round2: Assignment,
    qubits: usize,
}

/// Qubits claimed by classical provers' pad material.
pub const CLASSICAL_PAD_QUBITS: usize = 2;

fn table_prover(
    compiled: &CompiledGame,
    per_set: impl Fn(usize) -> Vec<i64>,
    round2: Assignment,
) -> Result<TableProver> {
    let entries = (0..compiled.sets().len())
        .map(|i| Ok(bits::from_slice(&compiled.encode_answers(&per_set(i))?)))
        .collect::<Result<Vec<u64>>>()?;
    let width = compiled.sets().first().map_or(0, |s| s.positions.len()) * compiled.label_bits();
    Ok(TableProver {
        round1: ClassicalCircuit::lookup(compiled.payload_bits(), &entries, width),
        round2,
        qubits: CLASSICAL_PAD_QUBITS,
    })
}

/// Answers every round from the deterministic table `tau`.
pub fn truthtable_prover(compiled: &CompiledGame, tau: &Assignment) -> Result<TableProver> {
    check_total(compiled, tau)?;
    table_prover(
        compiled,
        |i| compiled.set_questions(i).iter().map(|&q| tau.0[q]).collect(),
        tau.clone(),
    )
}

/// Round 1 answers with the accepted tuple closest to `tau` on the
/// encrypted context; round 2 answers from `tau`. Always passes the
/// predicate, at the cost of occasional inconsistency.
pub fn feasible_inconsistent_prover(compiled: &CompiledGame, tau: &Assignment) -> Result<TableProver> {
    check_total(compiled, tau)?;
    let game = compiled.game();
    if let Some(c) = (0..game.contexts().len()).find(|&c| game.accepted(c).is_empty()) {
        return Err(CompilerError::NoSatisfyingTuple(c));
    }
    let tuples = game
        .closest_feasible(tau)
        .expect("every context has an accepted tuple");
    table_prover(
        compiled,
        |i| {
            let s = &compiled.sets()[i];
            s.positions.iter().map(|&j| tuples[s.context][j]).collect()
        },
        tau.clone(),
    )
}

fn check_total(compiled: &CompiledGame, tau: &Assignment) -> Result<()> {
    if tau.0.len() != compiled.game().questions().len() {
        return Err(CompilerError::Malformed(format!(
            "table has {} entries for {} questions",
            tau.0.len(),
            compiled.game().questions().len()
        )));
    }
    Ok(())
}

impl TableProver {
    pub fn with_pad_qubits(mut self, qubits: usize) -> Self {
        self.qubits = qubits;
        self
    }

    pub fn round2_table(&self) -> &Assignment {
        &self.round2
    }
}

impl CompiledProver for TableProver {
    type Memory = ();

    fn round1(
        &self,
        _: &CompiledGame,
        message: &Message1,
        _: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<(Message2, ())> {
        let ek = &message.eval_key;
        let answers = ek.ceval(&self.round1, &message.payload, rng)?;
        let key_bits: Vec<bool> = (0..2 * self.qubits).map(|_| rng.random()).collect();
        let key_hat = ek.encrypt(&key_bits, rng);
        let pad_string = opad::samp(&message.opad_pk, self.qubits, rng)?;
        Ok((
            Message2 {
                answers,
                key_hat,
                pad_string,
            },
            (),
        ))
    }

    fn round2(&self, _: &CompiledGame, _: (), message: &Message3, _: &mut SimRng) -> Result<i64> {
        self.round2
            .0
            .get(message.question)
            .copied()
            .ok_or_else(|| CompilerError::Malformed(format!("unknown question {}", message.question)))
    }
}
