//! Guessing one message out of a small weighted set from its encryption.

use rand::Rng;

use crate::mc::{RateEstimate, SimRng};
use crate::qfhe::{ClassicalCiphertext, EvalKey, FheBackend, QfheError, QfheSecretKey};

use super::{ReductionError, Result};

/// Sees the evaluation key and an encryption of one of the messages and
/// names its index.
pub trait MessageDistinguisher {
    fn guess(
        &mut self,
        ek: &EvalKey,
        challenge: &ClassicalCiphertext,
        rng: &mut SimRng,
    ) -> std::result::Result<usize, QfheError>;
}

/// Always names the likeliest message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MostLikely(pub usize);

impl MostLikely {
    pub fn for_weights(weights: &[f64]) -> Self {
        let best = weights
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
        Self(best.0)
    }
}

impl MessageDistinguisher for MostLikely {
    fn guess(&mut self, _: &EvalKey, _: &ClassicalCiphertext, _: &mut SimRng) -> std::result::Result<usize, QfheError> {
        Ok(self.0)
    }
}

/// Names a uniformly random index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformGuess(pub usize);

impl MessageDistinguisher for UniformGuess {
    fn guess(&mut self, _: &EvalKey, _: &ClassicalCiphertext, rng: &mut SimRng) -> std::result::Result<usize, QfheError> {
        Ok(rng.random_range(0..self.0))
    }
}

/// Matches a leaked plaintext against the message list; guesses 0 when
/// nothing leaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakMatcher(pub Vec<Vec<bool>>);

impl MessageDistinguisher for LeakMatcher {
    fn guess(&mut self, _: &EvalKey, challenge: &ClassicalCiphertext, _: &mut SimRng) -> std::result::Result<usize, QfheError> {
        Ok(challenge
            .leaked_plaintext()
            .and_then(|m| self.0.iter().position(|x| *x == m))
            .unwrap_or(0))
    }
}

/// Fraction of rounds in which `d` names the message drawn from `weights`
/// and encrypted under a fresh key.
pub fn dind_prime_game<D: MessageDistinguisher + ?Sized>(
    d: &mut D,
    backend: FheBackend,
    lambda: usize,
    messages: &[Vec<bool>],
    weights: &[f64],
    trials: u64,
    rng: &mut SimRng,
) -> Result<RateEstimate> {
    let malformed = |m: &str| Err(ReductionError::Malformed(m.into()));
    if messages.is_empty() || messages.len() != weights.len() {
        return malformed("need one weight per message");
    }
    if messages.iter().any(|m| m.len() != messages[0].len()) {
        return malformed("messages must have equal length");
    }
    if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return malformed("weights must form a distribution");
    }
    let mut wins = 0;
    for _ in 0..trials {
        let sk = QfheSecretKey::gen(lambda, backend, rng)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let m = weights
            .iter()
            .position(|w| {
                acc += w;
                u < acc
            })
            .unwrap_or(weights.len() - 1);
        let challenge = sk.enc_classical(&messages[m], rng);
        if d.guess(&sk.eval_key(), &challenge, rng)? == m {
            wins += 1;
        }
    }
    Ok(RateEstimate::from_counts(wins, trials))
}
