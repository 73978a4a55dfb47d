//! Indistinguishability experiments against the classical encryption.

use rand::Rng;

use crate::mc::{RateEstimate, SimRng};

use super::{ClassicalCiphertext, EvalKey, FheBackend, QfheError, QfheSecretKey, Result};

/// Adversary in an indistinguishability game: sees the evaluation key and
/// a challenge ciphertext, outputs a guess for the hidden bit.
pub trait Distinguisher {
    fn guess(
        &mut self,
        ek: &EvalKey,
        challenge: &ClassicalCiphertext,
        rng: &mut SimRng,
    ) -> Result<bool>;
}

/// Ignores the challenge.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomGuess;

impl Distinguisher for RandomGuess {
    fn guess(&mut self, _: &EvalKey, _: &ClassicalCiphertext, rng: &mut SimRng) -> Result<bool> {
        Ok(rng.random())
    }
}

/// Reads the plaintext off a leaky ciphertext and compares it with `x1`.
#[derive(Debug, Clone)]
pub struct LeakReader {
    pub x1: Vec<bool>,
}

impl Distinguisher for LeakReader {
    fn guess(
        &mut self,
        _: &EvalKey,
        challenge: &ClassicalCiphertext,
        rng: &mut SimRng,
    ) -> Result<bool> {
        Ok(match challenge.leaked_plaintext() {
            Some(m) => m == self.x1,
            None => rng.random(),
        })
    }
}

/// Fraction of rounds in which `d` recovers `b` from a fresh-key encryption
/// of `x_b`.
pub fn twoind_game<D: Distinguisher + ?Sized>(
    d: &mut D,
    backend: FheBackend,
    lambda: usize,
    x0: &[bool],
    x1: &[bool],
    trials: u64,
    rng: &mut SimRng,
) -> Result<RateEstimate> {
    if x0.len() != x1.len() {
        return Err(QfheError::InputLength {
            expected: x0.len(),
            found: x1.len(),
        });
    }
    let mut wins = 0;
    for _ in 0..trials {
        let sk = QfheSecretKey::gen(lambda, backend, rng)?;
        let b: bool = rng.random();
        let challenge = sk.enc_classical(if b { x1 } else { x0 }, rng);
        if d.guess(&sk.eval_key(), &challenge, rng)? == b {
            wins += 1;
        }
    }
    Ok(RateEstimate::from_counts(wins, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::rng_from_seed;

    #[test]
    fn random_guess_is_half() {
        let mut rng = rng_from_seed(1);
        let r = twoind_game(
            &mut RandomGuess,
            FheBackend::XorStub,
            8,
            &[false, false],
            &[true, true],
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(r.within(0.5, 0.02), "{r:?}");
    }

    #[test]
    fn leaky_backend_is_broken() {
        let mut rng = rng_from_seed(2);
        let x1 = vec![true, false, true];
        let r = twoind_game(
            &mut LeakReader { x1: x1.clone() },
            FheBackend::Leaky,
            8,
            &[false, false, false],
            &x1,
            2_000,
            &mut rng,
        )
        .unwrap();
        assert_eq!(r.rate, 1.0);
    }

    #[test]
    fn leak_reader_learns_nothing_from_stub() {
        let mut rng = rng_from_seed(3);
        let x1 = vec![true];
        let r = twoind_game(
            &mut LeakReader { x1: x1.clone() },
            FheBackend::XorStub,
            8,
            &[false],
            &x1,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(r.within(0.5, 0.02), "{r:?}");
    }

    #[test]
    fn unequal_lengths_rejected() {
        let mut rng = rng_from_seed(4);
        assert!(twoind_game(
            &mut RandomGuess,
            FheBackend::XorStub,
            8,
            &[true],
            &[true, false],
            1,
            &mut rng
        )
        .is_err());
    }
}
