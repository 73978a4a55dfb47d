//! Seeded Monte Carlo plumbing.
//!
//! Each trial gets its own ChaCha stream derived from `(seed, trial)`, so a
//! run is reproducible regardless of how rayon schedules the work. Results
//! are collected in trial-index order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The RNG used throughout the crate.
pub type SimRng = ChaCha20Rng;

/// Derive a child seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.to_le_bytes());
    let out = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

/// RNG for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, trial))
}

/// RNG seeded directly.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Binomial rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub stderr: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let rate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / trials as f64).sqrt()
        };
        Self {
            successes,
            trials,
            rate,
            stderr,
        }
    }

    /// True when `target` lies within `tol` of the estimate.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.rate - target).abs() <= tol
    }
}

/// Run `trials` independent trials in parallel, returning outputs in order.
pub fn run_trials<T, E, F>(trials: u64, seed: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64, &mut SimRng) -> Result<T, E> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(t, &mut trial_rng(seed, t)))
        .collect()
}

/// Estimate a success probability from `trials` seeded trials.
pub fn estimate_rate<E, F>(trials: u64, seed: u64, f: F) -> Result<RateEstimate, E>
where
    E: Send,
    F: Fn(&mut SimRng) -> Result<bool, E> + Sync,
{
    let outcomes = run_trials(trials, seed, |_, rng| f(rng))?;
    let successes = outcomes.iter().filter(|&&ok| ok).count() as u64;
    Ok(RateEstimate::from_counts(successes, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::convert::Infallible;

    #[test]
    fn derived_seeds_differ_by_label() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn stderr_matches_binomial_formula() {
        let r = RateEstimate::from_counts(25, 100);
        assert!((r.rate - 0.25).abs() < 1e-15);
        assert!((r.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn runs_are_reproducible_and_ordered() {
        let a: Vec<u64> =
            run_trials(64, 9, |_, rng| Ok::<_, Infallible>(rng.random::<u64>())).unwrap();
        let b: Vec<u64> =
            run_trials(64, 9, |_, rng| Ok::<_, Infallible>(rng.random::<u64>())).unwrap();
        assert_eq!(a, b);
        let idx: Vec<u64> = run_trials(16, 0, |t, _| Ok::<_, Infallible>(t)).unwrap();
        assert_eq!(idx, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn fair_coin_rate() {
        let r = estimate_rate(10_000, 3, |rng| Ok::<_, Infallible>(rng.random_bool(0.5))).unwrap();
        assert!(r.within(0.5, 0.02), "{r:?}");
    }
}
