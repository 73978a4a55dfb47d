//! Rewinding a classical prover to guess the hidden bit.
//!
//! A valid answer to `c = 0` satisfies `a ^ b0 = 0`, and a valid answer to
//! `c = 1` satisfies `a ^ b1 = !s`. So a prover that would be accepted on
//! both challenges reveals `s = !(b0 ^ b1)`, and
//! `Pr[guess = s] >= Pr[both accepted] >= 2 Pr[win] - 1`.

use rand::Rng;

use crate::mc::{derive_seed, run_trials, RateEstimate};
use crate::tcf::{self, TcfBackend, TcfPublicKey};

use super::{decision, verifier_message1, ClassicalProver, PoqError, Result};

/// Run the prover once for its commitment, then replay it on both
/// challenges and combine the answers.
pub fn rewind_adversary<P: ClassicalProver + ?Sized, R: Rng + ?Sized>(
    prover: &P,
    pk: &TcfPublicKey,
    rng: &mut R,
) -> Result<bool> {
    let seed: u64 = rng.random();
    let z = prover.commit(pk, seed)?;
    if prover.commit(pk, seed)? != z {
        return Err(PoqError::NotReplayable);
    }
    let b0 = prover.respond(pk, &z, false, seed)?;
    let b1 = prover.respond(pk, &z, true, seed)?;
    Ok(!(b0 ^ b1))
}

/// Fraction of fresh key pairs on which the rewinding guess equals `s`.
pub fn rewind_game<P: ClassicalProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    let hits = run_trials(trials, seed, |_, rng| {
        let (v, pk) = verifier_message1(lambda, backend, rng)?;
        Ok::<_, PoqError>(rewind_adversary(prover, &pk, rng)? == v.hidden_bit())
    })?;
    let wins = hits.iter().filter(|&&h| h).count() as u64;
    Ok(RateEstimate::from_counts(wins, trials))
}

/// Per-`(pk, z)` record: acceptance on each challenge and whether the
/// rewinding guess was right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewindRow {
    pub s: bool,
    pub p0: f64,
    pub p1: f64,
    pub guess_correct: bool,
}

impl RewindRow {
    pub fn win(&self) -> f64 {
        (self.p0 + self.p1) / 2.0
    }
}

/// Win-rate table over `samples` fresh sessions.
pub fn rewind_table<P: ClassicalProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    samples: u64,
    seed: u64,
) -> Result<Vec<RewindRow>> {
    run_trials(samples, seed, |_, rng| {
        let (v, pk) = verifier_message1(lambda, backend, rng)?;
        let s = v.hidden_bit();
        let pseed: u64 = rng.random();
        let z = prover.commit(&pk, pseed)?;
        let b0 = prover.respond(&pk, &z, false, pseed)?;
        let b1 = prover.respond(&pk, &z, true, pseed)?;
        let sk = &v.keys().sk;
        let p = |c: bool, b: bool| decision(s, sk, &z, c, b).map(|ok| f64::from(u8::from(ok)));
        Ok(RewindRow {
            s,
            p0: p(false, b0)?,
            p1: p(true, b1)?,
            guess_correct: !(b0 ^ b1) == s,
        })
    })
}

/// Exact expected win rate per sample, enumerating both `s` and both `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub mean: f64,
    /// Largest per-sample value.
    pub max: f64,
}

/// For each sample, one prover seed and one key pair per `s`; the win rate
/// is averaged exactly over `s` and `c`.
pub fn analytic_win_rate<P: ClassicalProver + ?Sized>(
    prover: &P,
    lambda: usize,
    backend: TcfBackend,
    samples: u64,
    seed: u64,
) -> Result<AnalyticReport> {
    let values = run_trials(samples, seed, |t, rng| {
        let pseed = derive_seed(seed, t);
        let mut accepted = 0u32;
        for s in [false, true] {
            let kp = tcf::gen(lambda, Some(s), backend, rng)?;
            let z = prover.commit(&kp.pk, pseed)?;
            for c in [false, true] {
                let b = prover.respond(&kp.pk, &z, c, pseed)?;
                accepted += u32::from(decision(s, &kp.sk, &z, c, b)?);
            }
        }
        Ok::<_, PoqError>(f64::from(accepted) / 4.0)
    })?;
    Ok(AnalyticReport {
        mean: values.iter().sum::<f64>() / values.len().max(1) as f64,
        max: values.iter().copied().fold(0.0, f64::max),
    })
}
