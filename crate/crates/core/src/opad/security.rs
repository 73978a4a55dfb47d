//! Soundness experiment: after committing to `s`, the prover receives
//! either a uniform key (`b = 0`) or `dec(sk, s)` (`b = 1`) and guesses `b`.

use rand::Rng;

use crate::mc::{RateEstimate, SimRng};
use crate::qsim::{Basis, PauliKey, StateVector};
use crate::tcf::{TcfBackend, TcfPublicKey, TcfSecretKey};

use super::{
    dec, enc, extract_claw, gen, phase, samp, OpadError, OpadString, OracleMode, PadEntry,
    PhaseOracle, QubitPadString, Result,
};
use crate::bits::{self, BitString};

pub trait OpadProver {
    /// White-box hook called with the trapdoor before each round. Honest
    /// and classical provers ignore it.
    fn observe_trapdoor(&mut self, _sk: &TcfSecretKey) {}

    fn commit(
        &mut self,
        pk: &TcfPublicKey,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<OpadString>;

    /// `true` claims the key is `dec(sk, s)`.
    fn guess(&mut self, key: &PauliKey, oracle: &mut PhaseOracle, rng: &mut SimRng)
        -> Result<bool>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpadGameReport {
    pub rate: RateEstimate,
    /// Rounds after which the lazy oracle's query log contained a claw.
    pub claw_rounds: u64,
}

/// Play `trials` independent rounds with fresh keys and oracle.
pub fn security_game<P: OpadProver + ?Sized>(
    prover: &mut P,
    lambda: usize,
    backend: TcfBackend,
    mode: OracleMode,
    trials: u64,
    rng: &mut SimRng,
) -> Result<OpadGameReport> {
    let mut wins = 0;
    let mut claw_rounds = 0;
    for _ in 0..trials {
        let kp = gen(lambda, backend, rng)?;
        let mut oracle = PhaseOracle::new(mode, rng);
        prover.observe_trapdoor(&kp.sk);
        let s = prover.commit(&kp.pk, &mut oracle, rng)?;
        if s.is_empty() {
            return Err(OpadError::Malformed("empty pad string".into()));
        }
        let real = dec(&kp.sk, &s, &mut oracle)
            .map_err(|e| OpadError::Malformed(e.to_string()))?;
        let b: bool = rng.random();
        let key = if b {
            real
        } else {
            PauliKey::random(s.len(), rng)
        };
        if prover.guess(&key, &mut oracle, rng)? == b {
            wins += 1;
        }
        if mode == OracleMode::Lazy && extract_claw(&oracle, &kp.pk).is_some() {
            claw_rounds += 1;
        }
    }
    Ok(OpadGameReport {
        rate: RateEstimate::from_counts(wins, trials),
        claw_rounds,
    })
}

/// Classical: range-samples `s` and guesses at random.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampThenGuess;

impl OpadProver for SampThenGuess {
    fn commit(&mut self, pk: &TcfPublicKey, _: &mut PhaseOracle, rng: &mut SimRng) -> Result<OpadString> {
        samp(pk, 1, rng)
    }

    fn guess(&mut self, _: &PauliKey, _: &mut PhaseOracle, rng: &mut SimRng) -> Result<bool> {
        Ok(rng.random())
    }
}

/// Quantum: pads `|1>` honestly, then undoes the received key and checks
/// whether `|1>` comes back. Always right on the real key and right half
/// the time otherwise.
#[derive(Debug, Clone, Default)]
pub struct QuantumDistinguisher {
    held: Option<StateVector>,
}

impl OpadProver for QuantumDistinguisher {
    fn commit(
        &mut self,
        pk: &TcfPublicKey,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<OpadString> {
        let one = StateVector::basis(&[2], &[1])?;
        let (state, s) = enc(pk, &one, &[0], oracle, rng)?;
        self.held = Some(state);
        Ok(s)
    }

    fn guess(&mut self, key: &PauliKey, _: &mut PhaseOracle, rng: &mut SimRng) -> Result<bool> {
        let held = self
            .held
            .take()
            .ok_or_else(|| OpadError::Malformed("guess before commit".into()))?;
        let undone = held.apply_pauli_pad(key, &[0])?;
        let (digits, _) = undone.measure_registers(&[0], Basis::Standard, rng)?;
        Ok(digits[0] == 1)
    }
}

/// White-box cheater: uses the trapdoor to learn claws, queries the oracle
/// on both points of each, and so knows the key it committed to. It loses
/// only when the uniform key collides with the real one, which happens with
/// probability `4^-qubits`.
#[derive(Debug, Clone)]
pub struct ClawCheater {
    qubits: usize,
    sk: Option<TcfSecretKey>,
    expected: Option<PauliKey>,
}

impl ClawCheater {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits: qubits.max(1),
            sk: None,
            expected: None,
        }
    }

    fn entry(
        &self,
        pk: &TcfPublicKey,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<(PadEntry, bool)> {
        let sk = self
            .sk
            .as_ref()
            .ok_or_else(|| OpadError::Malformed("no trapdoor observed".into()))?;
        let n = pk.domain_bits();
        let (y, _) = pk.eval(false, rng.random_range(0..pk.domain_size()), rng)?;
        let (x0, x1) = sk.claw(&y)?;
        oracle.query(x0);
        oracle.query(x1);
        let d = bits::random(n, rng);
        let bit = phase(oracle, d, x0, x1);
        Ok((
            PadEntry {
                d: BitString::new(d, n),
                y,
            },
            bit,
        ))
    }
}

impl OpadProver for ClawCheater {
    fn observe_trapdoor(&mut self, sk: &TcfSecretKey) {
        self.sk = Some(sk.clone());
    }

    fn commit(
        &mut self,
        pk: &TcfPublicKey,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> Result<OpadString> {
        let mut entries = Vec::with_capacity(self.qubits);
        let mut kx = Vec::with_capacity(self.qubits);
        let mut kz = Vec::with_capacity(self.qubits);
        for _ in 0..self.qubits {
            let (x, bx) = self.entry(pk, oracle, rng)?;
            let (z, bz) = self.entry(pk, oracle, rng)?;
            entries.push(QubitPadString { x, z });
            kx.push(bx);
            kz.push(bz);
        }
        self.expected = Some(PauliKey::new(kx, kz)?);
        Ok(OpadString(entries))
    }

    fn guess(&mut self, key: &PauliKey, _: &mut PhaseOracle, _: &mut SimRng) -> Result<bool> {
        Ok(self.expected.take().as_ref() == Some(key))
    }
}
