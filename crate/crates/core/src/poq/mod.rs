//! Two-round proof of quantumness from a claw-free pair with a hidden bit.
//!
//! The verifier samples `s` and keys hiding it. The prover commits to
//! `(mu, d, y)`, which leaves it holding a BB84 state whose basis is `s` and
//! whose value `a` only the trapdoor reveals. Challenged with `c`, it
//! measures in a basis rotated by `+-pi/8` and reports `b`. An honest
//! quantum prover is accepted with probability `cos^2(pi/8)`; a classical
//! one with probability at most `3/4` plus whatever it learns about `s`.

mod provers;
mod rewind;

pub use provers::{ClassicalProver, ClassicalStrategy, HonestQuantumProver, PoqProver, TrapdoorCheater};
pub use rewind::{analytic_win_rate, rewind_adversary, rewind_game, rewind_table, AnalyticReport, RewindRow};

use std::f64::consts::FRAC_PI_8;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, BitString};
use crate::mc::{derive_seed, run_trials, RateEstimate, SimRng};
use crate::qsim::{gates, Basis, QsimError, StateVector, C64};
use crate::tcf::{self, samp_measure, Image, TcfBackend, TcfError, TcfKeyPair, TcfPublicKey, TcfSecretKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoqError {
    #[error("verifier expected {expected:?}, protocol is at {found:?}")]
    OutOfOrder { expected: Stage, found: Stage },
    #[error("malformed prover message: {0}")]
    Malformed(String),
    #[error("prover gave a different commitment when replayed with the same seed")]
    NotReplayable,
    #[error(transparent)]
    Tcf(#[from] TcfError),
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, PoqError>;

/// Position of the verifier in the message sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    AwaitCommitment,
    AwaitChallenge,
    AwaitAnswer,
    Complete,
}

/// The prover's first message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub mu: bool,
    /// Hadamard-basis outcome on the trailing `n - 1` preimage bits.
    pub d: BitString,
    pub y: Image,
}

/// Verifier side of one session. Messages must arrive in order.
#[derive(Debug, Clone)]
pub struct PoqVerifierState {
    s: bool,
    keys: TcfKeyPair,
    stage: Stage,
    commitment: Option<Commitment>,
    c: Option<bool>,
    b: Option<bool>,
}

/// Message 1: sample `s` and keys hiding it.
pub fn verifier_message1<R: Rng + ?Sized>(
    lambda: usize,
    backend: TcfBackend,
    rng: &mut R,
) -> Result<(PoqVerifierState, TcfPublicKey)> {
    let s: bool = rng.random();
    let keys = tcf::gen(lambda, Some(s), backend, rng)?;
    let pk = keys.pk.clone();
    Ok((
        PoqVerifierState {
            s,
            keys,
            stage: Stage::AwaitCommitment,
            commitment: None,
            c: None,
            b: None,
        },
        pk,
    ))
}

impl PoqVerifierState {
    pub fn hidden_bit(&self) -> bool {
        self.s
    }

    pub fn keys(&self) -> &TcfKeyPair {
        &self.keys
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn challenge(&self) -> Option<bool> {
        self.c
    }

    fn expect(&self, expected: Stage) -> Result<()> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(PoqError::OutOfOrder {
                expected,
                found: self.stage,
            })
        }
    }

    /// Message 2.
    pub fn receive_commitment(&mut self, z: Commitment) -> Result<()> {
        self.expect(Stage::AwaitCommitment)?;
        check_shape(&self.keys.pk, &z)?;
        self.commitment = Some(z);
        self.stage = Stage::AwaitChallenge;
        Ok(())
    }

    /// Message 4.
    pub fn receive_answer(&mut self, b: bool) -> Result<()> {
        self.expect(Stage::AwaitAnswer)?;
        self.b = Some(b);
        self.stage = Stage::Complete;
        Ok(())
    }
}

/// Message 3: a uniform challenge bit.
pub fn verifier_message3<R: Rng + ?Sized>(state: &mut PoqVerifierState, rng: &mut R) -> Result<bool> {
    state.expect(Stage::AwaitChallenge)?;
    let c: bool = rng.random();
    state.c = Some(c);
    state.stage = Stage::AwaitAnswer;
    Ok(c)
}

/// Final decision, once every message has arrived.
pub fn verifier_decide(state: &PoqVerifierState) -> Result<bool> {
    state.expect(Stage::Complete)?;
    match (&state.commitment, state.c, state.b) {
        (Some(z), Some(c), Some(b)) => decision(state.s, &state.keys.sk, z, c, b),
        _ => unreachable!("a complete session has every message"),
    }
}

fn check_shape(pk: &TcfPublicKey, z: &Commitment) -> Result<()> {
    let n = pk.domain_bits();
    if z.d.width != n - 1 {
        return Err(PoqError::Malformed(format!(
            "d has width {}, expected {}",
            z.d.width,
            n - 1
        )));
    }
    Ok(())
}

/// The bit `a` encoded in the prover's BB84 state: the value for `s = 1`,
/// the phase for `s = 0`.
pub fn bb84_value(s: bool, sk: &TcfSecretKey, z: &Commitment) -> Result<bool> {
    let n = sk.domain_bits();
    let (x0, x1) = sk.claw(&z.y)?;
    Ok(if s {
        z.mu ^ bits::first(x0, n)
    } else {
        bits::dot(z.d.value, bits::trailing(x0 ^ x1, n))
    })
}

/// `s` as recorded in a claw: the leading bits of its members differ by it.
pub fn hidden_bit_from_claw(sk: &TcfSecretKey, y: &Image) -> Result<bool> {
    let n = sk.domain_bits();
    let (x0, x1) = sk.claw(y)?;
    Ok(bits::first(x0 ^ x1, n))
}

/// Accept iff `a ^ b = c` when `s = 0` and `a ^ b = 0` when `s = 1`.
pub fn decision(s: bool, sk: &TcfSecretKey, z: &Commitment, c: bool, b: bool) -> Result<bool> {
    let a = bb84_value(s, sk, z)?;
    Ok(if s { a == b } else { (a ^ b) == c })
}

/// Honest first message: coherent sampling on a `|+>` control, Hadamards on
/// the trailing preimage bits, then measurement of everything but the
/// control. Returns the commitment and the leftover qubit.
pub fn honest_prover_round1<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    rng: &mut R,
) -> Result<(Commitment, StateVector)> {
    let n = pk.domain_bits();
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let plus = StateVector::qubit(h, h)?;
    let (y, state) = samp_measure(pk, &plus, 0, rng)?;
    // Registers: 0 control, 1..=n preimage with the leading bit at 1.
    let (mu, state) = state.measure_and_discard(&[1], Basis::Standard, rng)?;
    let v_regs: Vec<usize> = (1..n).collect();
    let (d, leftover) = state.measure_and_discard(&v_regs, Basis::Hadamard, rng)?;
    let d_bits: Vec<bool> = d.iter().map(|&v| v == 1).collect();
    Ok((
        Commitment {
            mu: mu[0] == 1,
            d: BitString::new(bits::from_slice(&d_bits), n - 1),
            y,
        },
        leftover,
    ))
}

/// Basis angle for challenge `c`: outcome 0 is `cos t|0> + sin t|1>`.
pub fn challenge_angle(c: bool) -> f64 {
    if c {
        -FRAC_PI_8
    } else {
        FRAC_PI_8
    }
}

/// Honest second message: measure the leftover qubit in the basis
/// selected by `c`.
pub fn honest_prover_round2<R: Rng + ?Sized>(leftover: &StateVector, c: bool, rng: &mut R) -> Result<bool> {
    if leftover.dims() != [2] {
        return Err(PoqError::Malformed("leftover must be a single qubit".into()));
    }
    // Rows are the basis bras, so outcome k lands on |k>.
    let rotated = leftover.apply_unitary(&gates::rotation_y(-challenge_angle(c)), &[0])?;
    let (digits, _) = rotated.measure_registers(&[0], Basis::Standard, rng)?;
    Ok(digits[0] == 1)
}

/// Public record of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoqTranscript {
    /// Seed of the session RNG; replaying it reproduces the session.
    pub seed: u64,
    pub pk: TcfPublicKey,
    pub commitment: Commitment,
    pub c: bool,
    pub b: bool,
    pub accept: bool,
}

impl PoqTranscript {
    /// Recompute the decision with the trapdoor alone.
    pub fn recompute(&self, sk: &TcfSecretKey) -> Result<bool> {
        let s = hidden_bit_from_claw(sk, &self.commitment.y)?;
        decision(s, sk, &self.commitment, self.c, self.b)
    }
}

/// One full session; the verifier's secret is returned beside the transcript.
pub fn run_session<P: PoqProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    seed: u64,
    rng: &mut SimRng,
) -> Result<(PoqTranscript, PoqVerifierState)> {
    let (mut verifier, pk) = verifier_message1(lambda, backend, rng)?;
    let (z, memory) = prover.round1(&pk, rng)?;
    verifier.receive_commitment(z.clone())?;
    let c = verifier_message3(&mut verifier, rng)?;
    let b = prover.round2(memory, c, rng)?;
    verifier.receive_answer(b)?;
    let accept = verifier_decide(&verifier)?;
    Ok((
        PoqTranscript {
            seed,
            pk,
            commitment: z,
            c,
            b,
            accept,
        },
        verifier,
    ))
}

/// `trials` seeded sessions, in trial order.
pub fn run_transcripts<P: PoqProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    trials: u64,
    seed: u64,
) -> Result<Vec<PoqTranscript>> {
    run_trials(trials, seed, |t, rng| {
        run_session(prover, lambda, backend, derive_seed(seed, t), rng).map(|(tr, _)| tr)
    })
}

/// Acceptance rate over `trials` seeded sessions.
pub fn run_protocol<P: PoqProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    let accepted = run_trials(trials, seed, |t, rng| {
        run_session(prover, lambda, backend, derive_seed(seed, t), rng).map(|(tr, _)| tr.accept)
    })?;
    let wins = accepted.iter().filter(|&&a| a).count() as u64;
    Ok(RateEstimate::from_counts(wins, trials))
}

/// `cos^2(pi/8)`.
pub fn honest_win_probability() -> f64 {
    FRAC_PI_8.cos().powi(2)
}
