//! Simulated quantum homomorphic encryption with Pauli-pad ciphertexts.
//!
//! A classical plaintext bit `m` is stored as `(m ^ k, E(k))`, where `E` is
//! one of the pluggable pad encryptions in [`FheBackend`]. A quantum
//! ciphertext is `X^x Z^z |psi>` together with a classical encryption of
//! the pad key `(x, z)`.
//!
//! Evaluation is a trusted executor: an [`EvalKey`] wraps the secret key
//! privately and tracks pads through circuits. Callers holding only an
//! `EvalKey` cannot read the secret; the homomorphic property is modelled
//! at the level of interfaces and output distributions, not realized
//! cryptographically.

mod circuit;
mod games;
mod quantum;

pub use circuit::{ClassicalCircuit, Gate};
pub use games::{twoind_game, Distinguisher, LeakReader, RandomGuess};
pub use quantum::{EvalOutput, QCircuit, QOp, QfheCiphertext, QuantumCipherLog};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::qsim::QsimError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QfheError {
    #[error("backend {0:?} is not available")]
    UnsupportedBackend(String),
    #[error("ciphertext was produced by the {found} backend, key is {expected}")]
    BackendMismatch { expected: FheBackend, found: FheBackend },
    #[error("ciphertext was produced under a different key")]
    ForeignCiphertext,
    #[error("circuit expects {expected} input bits, got {found}")]
    InputLength { expected: usize, found: usize },
    #[error("circuit refers to wire {0} before it is defined")]
    BadWire(usize),
    #[error("selector value {0} has no branch")]
    BadSelector(usize),
    #[error("measurement branches must all have the same length")]
    RaggedBranches,
    #[error("measured eigenvalue {0} has no label")]
    UnlabelledOutcome(f64),
    #[error("quantum ciphertexts need qubit registers")]
    NonQubit,
    #[error("distinguisher aborted")]
    Aborted,
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, QfheError>;

/// Pad-encryption backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FheBackend {
    /// Pads masked with a keyed hash; exact and fast.
    #[serde(rename = "stub")]
    XorStub,
    /// Like `XorStub` but publishes the pad in the clear.
    Leaky,
    /// Symmetric Regev encryption of each pad bit at toy parameters.
    Lwe,
}

impl FromStr for FheBackend {
    type Err = QfheError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stub" => Ok(FheBackend::XorStub),
            "leaky" => Ok(FheBackend::Leaky),
            "lwe" => Ok(FheBackend::Lwe),
            other => Err(QfheError::UnsupportedBackend(other.to_string())),
        }
    }
}

impl fmt::Display for FheBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FheBackend::XorStub => "stub",
            FheBackend::Leaky => "leaky",
            FheBackend::Lwe => "lwe",
        })
    }
}

/// Regev parameters: modulus `2^12`, noise in `[-8, 8]`.
const LWE_MODULUS: u64 = 1 << 12;
const LWE_NOISE: i64 = 8;

#[derive(Debug)]
struct SecretMaterial {
    backend: FheBackend,
    lambda: usize,
    key_id: u64,
    mask_key: [u8; 32],
    lwe_secret: Vec<u64>,
}

/// QFHE secret key.
#[derive(Debug, Clone)]
pub struct QfheSecretKey {
    inner: Arc<SecretMaterial>,
}

/// Public evaluation handle; wraps the secret without exposing it.
#[derive(Debug, Clone)]
pub struct EvalKey {
    inner: Arc<SecretMaterial>,
}

/// Encryption of one pad bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PadCipher {
    Stub { nonce: u64, masked: bool },
    Leaky { nonce: u64, masked: bool, pad: bool },
    Lwe { a: Vec<u64>, b: u64 },
}

/// One plaintext bit as `(m ^ k, E(k))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCipher {
    pub padded: bool,
    pub pad: PadCipher,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCiphertext {
    pub backend: FheBackend,
    pub key_id: u64,
    pub bits: Vec<BitCipher>,
}

impl ClassicalCiphertext {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Plaintext readable from a leaky ciphertext without any key.
    pub fn leaked_plaintext(&self) -> Option<Vec<bool>> {
        self.bits
            .iter()
            .map(|b| match b.pad {
                PadCipher::Leaky { pad, .. } => Some(b.padded ^ pad),
                _ => None,
            })
            .collect()
    }

    /// Concatenate two ciphertexts under the same key.
    pub fn concat(&self, other: &ClassicalCiphertext) -> ClassicalCiphertext {
        let mut bits = self.bits.clone();
        bits.extend(other.bits.iter().cloned());
        ClassicalCiphertext {
            backend: self.backend,
            key_id: self.key_id,
            bits,
        }
    }

    /// Sub-range of bits.
    pub fn slice(&self, start: usize, len: usize) -> ClassicalCiphertext {
        ClassicalCiphertext {
            backend: self.backend,
            key_id: self.key_id,
            bits: self.bits[start..start + len].to_vec(),
        }
    }
}

impl SecretMaterial {
    fn mask(&self, nonce: u64) -> bool {
        let mut h = Sha256::new();
        h.update(self.mask_key);
        h.update(nonce.to_le_bytes());
        h.finalize()[0] & 1 == 1
    }

    fn enc_pad<R: Rng + ?Sized>(&self, k: bool, rng: &mut R) -> PadCipher {
        match self.backend {
            FheBackend::XorStub => {
                let nonce = rng.random();
                PadCipher::Stub {
                    nonce,
                    masked: k ^ self.mask(nonce),
                }
            }
            FheBackend::Leaky => {
                let nonce = rng.random();
                PadCipher::Leaky {
                    nonce,
                    masked: k ^ self.mask(nonce),
                    pad: k,
                }
            }
            FheBackend::Lwe => {
                let q = LWE_MODULUS;
                let a: Vec<u64> = (0..self.lwe_secret.len())
                    .map(|_| rng.random_range(0..q))
                    .collect();
                let e = rng.random_range(-LWE_NOISE..=LWE_NOISE);
                let dot = a
                    .iter()
                    .zip(&self.lwe_secret)
                    .fold(0u64, |acc, (x, s)| (acc + x * s) % q);
                let b = (dot as i64 + e + i64::from(k) * (q as i64 / 2)).rem_euclid(q as i64);
                PadCipher::Lwe { a, b: b as u64 }
            }
        }
    }

    fn dec_pad(&self, c: &PadCipher) -> Result<bool> {
        match (self.backend, c) {
            (FheBackend::XorStub, PadCipher::Stub { nonce, masked })
            | (FheBackend::Leaky, PadCipher::Leaky { nonce, masked, .. }) => {
                Ok(masked ^ self.mask(*nonce))
            }
            (FheBackend::Lwe, PadCipher::Lwe { a, b }) => {
                if a.len() != self.lwe_secret.len() {
                    return Err(QfheError::ForeignCiphertext);
                }
                let q = LWE_MODULUS;
                let dot = a
                    .iter()
                    .zip(&self.lwe_secret)
                    .fold(0u64, |acc, (x, s)| (acc + x * s) % q);
                let centered = (b + q - dot) % q;
                Ok(centered > q / 4 && centered < 3 * q / 4)
            }
            _ => Err(QfheError::ForeignCiphertext),
        }
    }

    fn enc_bits<R: Rng + ?Sized>(&self, m: &[bool], rng: &mut R) -> ClassicalCiphertext {
        ClassicalCiphertext {
            backend: self.backend,
            key_id: self.key_id,
            bits: m
                .iter()
                .map(|&bit| {
                    let k: bool = rng.random();
                    BitCipher {
                        padded: bit ^ k,
                        pad: self.enc_pad(k, rng),
                    }
                })
                .collect(),
        }
    }

    fn dec_bits(&self, c: &ClassicalCiphertext) -> Result<Vec<bool>> {
        if c.backend != self.backend {
            return Err(QfheError::BackendMismatch {
                expected: self.backend,
                found: c.backend,
            });
        }
        c.bits
            .iter()
            .map(|b| Ok(b.padded ^ self.dec_pad(&b.pad)?))
            .collect()
    }
}

impl QfheSecretKey {
    pub fn gen<R: Rng + ?Sized>(lambda: usize, backend: FheBackend, rng: &mut R) -> Result<Self> {
        let mut mask_key = [0u8; 32];
        rng.fill(&mut mask_key);
        let lwe_secret = match backend {
            FheBackend::Lwe => (0..lambda.max(1))
                .map(|_| rng.random_range(0..LWE_MODULUS))
                .collect(),
            _ => Vec::new(),
        };
        Ok(Self {
            inner: Arc::new(SecretMaterial {
                backend,
                lambda,
                key_id: rng.random(),
                mask_key,
                lwe_secret,
            }),
        })
    }

    pub fn lambda(&self) -> usize {
        self.inner.lambda
    }

    pub fn backend(&self) -> FheBackend {
        self.inner.backend
    }

    pub fn key_id(&self) -> u64 {
        self.inner.key_id
    }

    pub fn eval_key(&self) -> EvalKey {
        EvalKey {
            inner: Arc::clone(&self.inner),
        }
    }

    pub fn enc_classical<R: Rng + ?Sized>(&self, m: &[bool], rng: &mut R) -> ClassicalCiphertext {
        self.inner.enc_bits(m, rng)
    }

    /// Decrypts with this key regardless of which key produced `c`; a
    /// foreign ciphertext yields unrelated bits.
    pub fn dec_classical(&self, c: &ClassicalCiphertext) -> Result<Vec<bool>> {
        self.inner.dec_bits(c)
    }
}

impl EvalKey {
    pub fn backend(&self) -> FheBackend {
        self.inner.backend
    }

    pub fn lambda(&self) -> usize {
        self.inner.lambda
    }

    /// Public-key style encryption, as any evaluator can produce.
    pub fn encrypt<R: Rng + ?Sized>(&self, m: &[bool], rng: &mut R) -> ClassicalCiphertext {
        self.inner.enc_bits(m, rng)
    }

    /// Decryption as performed by a computationally unbounded adversary.
    /// Only white-box provers that model a broken scheme call this.
    pub fn unbounded_decrypt(&self, c: &ClassicalCiphertext) -> Result<Vec<bool>> {
        if c.key_id != self.inner.key_id {
            return Err(QfheError::ForeignCiphertext);
        }
        self.inner.dec_bits(c)
    }

    /// Evaluate a classical circuit; output pads are fresh and uniform.
    pub fn ceval<R: Rng + ?Sized>(
        &self,
        circuit: &ClassicalCircuit,
        input: &ClassicalCiphertext,
        rng: &mut R,
    ) -> Result<ClassicalCiphertext> {
        if input.key_id != self.inner.key_id {
            return Err(QfheError::ForeignCiphertext);
        }
        let plain = self.inner.dec_bits(input)?;
        let out = circuit.evaluate(&plain)?;
        Ok(self.inner.enc_bits(&out, rng))
    }
}
