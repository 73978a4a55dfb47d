//! Provers: the honest quantum circuit and classical strategies that are
//! pure functions of `(pk, history, seed)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, BitString};
use crate::mc::{derive_seed, rng_from_seed, SimRng};
use crate::qsim::StateVector;
use crate::tcf::TcfPublicKey;

use super::{honest_prover_round1, honest_prover_round2, Commitment, PoqError, Result};

/// A prover as seen by the protocol driver. `Memory` is whatever the
/// prover carries between its two messages; it is consumed by `round2`.
pub trait PoqProver: Sync {
    type Memory;

    fn round1(&self, pk: &TcfPublicKey, rng: &mut SimRng) -> Result<(Commitment, Self::Memory)>;

    fn round2(&self, memory: Self::Memory, c: bool, rng: &mut SimRng) -> Result<bool>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HonestQuantumProver;

impl PoqProver for HonestQuantumProver {
    type Memory = StateVector;

    fn round1(&self, pk: &TcfPublicKey, rng: &mut SimRng) -> Result<(Commitment, StateVector)> {
        honest_prover_round1(pk, rng)
    }

    fn round2(&self, leftover: StateVector, c: bool, rng: &mut SimRng) -> Result<bool> {
        honest_prover_round2(&leftover, c, rng)
    }
}

/// A classical prover. Both messages must be deterministic in their
/// arguments, which is what makes rewinding a replay.
pub trait ClassicalProver: Sync {
    fn commit(&self, pk: &TcfPublicKey, seed: u64) -> Result<Commitment>;

    fn respond(&self, pk: &TcfPublicKey, z: &Commitment, c: bool, seed: u64) -> Result<bool>;
}

impl<P: ClassicalProver> PoqProver for P {
    type Memory = (TcfPublicKey, Commitment, u64);

    fn round1(&self, pk: &TcfPublicKey, rng: &mut SimRng) -> Result<(Commitment, Self::Memory)> {
        let seed: u64 = rng.random();
        let z = self.commit(pk, seed)?;
        Ok((z.clone(), (pk.clone(), z, seed)))
    }

    fn round2(&self, (pk, z, seed): Self::Memory, c: bool, _: &mut SimRng) -> Result<bool> {
        self.respond(&pk, &z, c, seed)
    }
}

const COMMIT_LABEL: u64 = 0x636f_6d6d;
const ANSWER_LABEL: u64 = 0x616e_7377;
const COIN_LABEL: u64 = 0x636f_696e;

/// Classical range sampling: a uniform `x`, `y ~ f_0(x)`, `mu` the leading
/// bit of `x` and a uniform `d`. The returned `x` is the branch-0 preimage.
fn sampled_commitment(pk: &TcfPublicKey, seed: u64) -> Result<(Commitment, u64)> {
    let mut rng = rng_from_seed(derive_seed(seed, COMMIT_LABEL));
    let n = pk.domain_bits();
    let x = rng.random_range(0..pk.domain_size());
    let (y, _) = pk.eval(false, x, &mut rng)?;
    Ok((
        Commitment {
            mu: bits::first(x, n),
            d: BitString::new(bits::random(n - 1, &mut rng), n - 1),
            y,
        },
        x,
    ))
}

/// Built-in efficient classical strategies. Each commits by classical range
/// sampling and differs only in how it answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalStrategy {
    AlwaysZero,
    AlwaysOne,
    /// Answers `b = c`.
    AnswerChallenge,
    /// A seed-derived coin per challenge.
    RandomAnswer,
}

impl ClassicalStrategy {
    pub const ZOO: [ClassicalStrategy; 4] = [
        Self::AlwaysZero,
        Self::AlwaysOne,
        Self::AnswerChallenge,
        Self::RandomAnswer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::AlwaysZero => "always-zero",
            Self::AlwaysOne => "always-one",
            Self::AnswerChallenge => "answer-challenge",
            Self::RandomAnswer => "random-answer",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ZOO.into_iter().find(|s| s.name() == name)
    }
}

impl ClassicalProver for ClassicalStrategy {
    fn commit(&self, pk: &TcfPublicKey, seed: u64) -> Result<Commitment> {
        Ok(sampled_commitment(pk, seed)?.0)
    }

    fn respond(&self, _: &TcfPublicKey, _: &Commitment, c: bool, seed: u64) -> Result<bool> {
        Ok(match self {
            Self::AlwaysZero => false,
            Self::AlwaysOne => true,
            Self::AnswerChallenge => c,
            Self::RandomAnswer => derive_seed(seed, ANSWER_LABEL ^ u64::from(c)) & 1 == 1,
        })
    }
}

/// Computationally unbounded classical prover: with probability `knows`
/// (a seed-derived coin) it inverts the public key by exhaustion, learns
/// `s` and `a`, and answers correctly; otherwise it plays
/// [`ClassicalStrategy::AlwaysZero`]. Wins with probability
/// `3/4 + knows/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapdoorCheater {
    pub knows: f64,
}

impl TrapdoorCheater {
    /// A cheater winning with probability `3/4 + delta`.
    pub fn with_advantage(delta: f64) -> Self {
        Self {
            knows: (4.0 * delta).clamp(0.0, 1.0),
        }
    }

    fn informed(&self, seed: u64) -> bool {
        let coin = derive_seed(seed, COIN_LABEL) as f64 / u64::MAX as f64;
        coin < self.knows
    }
}

impl ClassicalProver for TrapdoorCheater {
    fn commit(&self, pk: &TcfPublicKey, seed: u64) -> Result<Commitment> {
        Ok(sampled_commitment(pk, seed)?.0)
    }

    fn respond(&self, pk: &TcfPublicKey, z: &Commitment, c: bool, seed: u64) -> Result<bool> {
        if !self.informed(seed) {
            return Ok(false);
        }
        let n = pk.domain_bits();
        let pre = pk.preimages(&z.y);
        let find = |b: bool| {
            pre.iter()
                .find(|&&(pb, _, _)| pb == b)
                .map(|&(_, x, _)| x)
                .ok_or_else(|| PoqError::Malformed("image has no claw".into()))
        };
        let (x0, x1) = (find(false)?, find(true)?);
        let s = bits::first(x0 ^ x1, n);
        Ok(if s {
            z.mu ^ bits::first(x0, n)
        } else {
            bits::dot(z.d.value, bits::trailing(x0 ^ x1, n)) ^ c
        })
    }
}
