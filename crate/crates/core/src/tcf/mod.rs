//! Trapdoor claw-free function families.
//!
//! Domain points are `n`-bit strings whose leading bit plays the role of
//! the "first bit" in `X = {0,1} x V`. Two backends are provided:
//!
//! - [`TcfBackend::Ideal`]: exact claws `x1 = x0 ^ delta` through a random
//!   injection, with deterministic images.
//! - [`TcfBackend::Lwe`] (feature `lwe`): a toy noisy family whose images
//!   are distributions; see the `lwe` module docs.
//!
//! With a hidden bit `s`, every claw `(x0, x1)` satisfies
//! `first(x0) ^ first(x1) = s`.

mod ideal;
#[cfg(feature = "lwe")]
mod lwe;
mod samp;

pub use ideal::IMAGE_EXTRA_BITS;
pub use samp::{coherent_samp, samp_measure};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::QsimError;

/// Largest supported security parameter; keeps tables and states small.
pub const MAX_LAMBDA: usize = 16;
/// Smallest supported security parameter.
pub const MIN_LAMBDA: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TcfError {
    #[error("security parameter {0} outside [{MIN_LAMBDA}, {MAX_LAMBDA}]")]
    BadLambda(usize),
    #[error("backend {0:?} is not available in this build")]
    UnsupportedBackend(String),
    #[error("domain point {0:#x} out of range")]
    OutOfDomain(u64),
    #[error("value is not in the image")]
    NotInImage,
    #[error("key generation failed to find separating parameters")]
    KeyGeneration,
    #[error("register layout mismatch: {0}")]
    Registers(String),
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, TcfError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TcfBackend {
    Ideal,
    Lwe,
}

impl FromStr for TcfBackend {
    type Err = TcfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(TcfBackend::Ideal),
            "lwe" => Ok(TcfBackend::Lwe),
            other => Err(TcfError::UnsupportedBackend(other.to_string())),
        }
    }
}

impl fmt::Display for TcfBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TcfBackend::Ideal => "ideal",
            TcfBackend::Lwe => "lwe",
        })
    }
}

/// A function value. The ideal backend uses one coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Image(pub Vec<u64>);

impl Image {
    pub fn scalar(v: u64) -> Self {
        Image(vec![v])
    }

    pub fn as_scalar(&self) -> Option<u64> {
        match self.0.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    /// Bytes fed to hash functions.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|v| v.to_be_bytes()).collect()
    }
}

impl Serialize for Image {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:x}")).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Image {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<String>::deserialize(d)?;
        parts
            .iter()
            .map(|p| u64::from_str_radix(p, 16).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Image)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
enum PublicKind {
    Ideal(ideal::IdealPublic),
    #[cfg(feature = "lwe")]
    Lwe(lwe::LwePublic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
enum SecretKind {
    Ideal(ideal::IdealSecret),
    #[cfg(feature = "lwe")]
    Lwe(lwe::LweSecret),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcfPublicKey {
    domain_bits: usize,
    #[serde(flatten)]
    kind: PublicKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcfSecretKey {
    domain_bits: usize,
    #[serde(flatten)]
    kind: SecretKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcfKeyPair {
    pub pk: TcfPublicKey,
    #[serde(rename = "secret")]
    pub sk: TcfSecretKey,
    pub hidden_bit: Option<bool>,
}

/// Generate a key pair. With `hidden = Some(s)` every claw hides `s` in the
/// xor of its leading bits.
pub fn gen<R: Rng + ?Sized>(
    lambda: usize,
    hidden: Option<bool>,
    backend: TcfBackend,
    rng: &mut R,
) -> Result<TcfKeyPair> {
    if !(MIN_LAMBDA..=MAX_LAMBDA).contains(&lambda) {
        return Err(TcfError::BadLambda(lambda));
    }
    match backend {
        TcfBackend::Ideal => {
            let (pk, sk) = ideal::gen(lambda, hidden, rng);
            Ok(TcfKeyPair {
                pk: TcfPublicKey {
                    domain_bits: lambda,
                    kind: PublicKind::Ideal(pk),
                },
                sk: TcfSecretKey {
                    domain_bits: lambda,
                    kind: SecretKind::Ideal(sk),
                },
                hidden_bit: hidden,
            })
        }
        #[cfg(feature = "lwe")]
        TcfBackend::Lwe => {
            let n = lwe::domain_bits_for(lambda);
            let (pk, sk) = lwe::gen(lambda, hidden, rng)?;
            let hidden_bit = hidden.is_some().then_some(sk.sigma);
            Ok(TcfKeyPair {
                pk: TcfPublicKey {
                    domain_bits: n,
                    kind: PublicKind::Lwe(pk),
                },
                sk: TcfSecretKey {
                    domain_bits: n,
                    kind: SecretKind::Lwe(sk),
                },
                hidden_bit,
            })
        }
        #[cfg(not(feature = "lwe"))]
        TcfBackend::Lwe => Err(TcfError::UnsupportedBackend("lwe".into())),
    }
}

impl TcfPublicKey {
    /// `n`, the domain width in bits.
    pub fn domain_bits(&self) -> usize {
        self.domain_bits
    }

    pub fn domain_size(&self) -> u64 {
        1u64 << self.domain_bits
    }

    pub fn backend(&self) -> TcfBackend {
        match self.kind {
            PublicKind::Ideal(_) => TcfBackend::Ideal,
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(_) => TcfBackend::Lwe,
        }
    }

    fn check_domain(&self, x: u64) -> Result<()> {
        if x >= self.domain_size() {
            return Err(TcfError::OutOfDomain(x));
        }
        Ok(())
    }

    /// Sample `y ~ f_b(x)`, returning it with its probability.
    pub fn eval<R: Rng + ?Sized>(&self, b: bool, x: u64, rng: &mut R) -> Result<(Image, f64)> {
        self.check_domain(x)?;
        match &self.kind {
            PublicKind::Ideal(p) => {
                let _ = rng;
                Ok((p.eval(b, x), 1.0))
            }
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => Ok(p.sample(b, x, rng)),
        }
    }

    /// Full distribution `f_b(x)` as `(image, probability)` pairs.
    pub fn support(&self, b: bool, x: u64) -> Result<Vec<(Image, f64)>> {
        self.check_domain(x)?;
        Ok(match &self.kind {
            PublicKind::Ideal(p) => vec![(p.eval(b, x), 1.0)],
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => p.support(b, x),
        })
    }

    /// `Chk(pk, b, x, y)`: whether `y` is in the support of `f_b(x)`.
    pub fn chk(&self, b: bool, x: u64, y: &Image) -> bool {
        if x >= self.domain_size() {
            return false;
        }
        match &self.kind {
            PublicKind::Ideal(p) => p.eval(b, x) == *y,
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => p.chk(b, x, y),
        }
    }

    /// Every `(b, x, f_b(x)(y))` with positive density at `y`.
    pub fn preimages(&self, y: &Image) -> Vec<(bool, u64, f64)> {
        match &self.kind {
            PublicKind::Ideal(p) => p.preimages(y),
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => p.preimages(y),
        }
    }

    /// Number of distinct encodable images (dense register size).
    pub fn image_alphabet_size(&self) -> usize {
        match &self.kind {
            PublicKind::Ideal(_) => 1usize << (self.domain_bits + IMAGE_EXTRA_BITS),
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => p.image_alphabet_size(),
        }
    }

    /// Dense register index of an image.
    pub fn image_index(&self, y: &Image) -> usize {
        match &self.kind {
            PublicKind::Ideal(_) => y.as_scalar().unwrap_or(0) as usize,
            #[cfg(feature = "lwe")]
            PublicKind::Lwe(p) => p.image_index(y),
        }
    }
}

impl TcfSecretKey {
    pub fn domain_bits(&self) -> usize {
        self.domain_bits
    }

    /// `Inv(sk, b, y)`.
    pub fn inv(&self, b: bool, y: &Image) -> Result<u64> {
        match &self.kind {
            SecretKind::Ideal(s) => s.inv(b, y),
            #[cfg(feature = "lwe")]
            SecretKind::Lwe(s) => s.inv(b, y),
        }
    }

    /// Both claw members `(x0, x1)` over `y`.
    pub fn claw(&self, y: &Image) -> Result<(u64, u64)> {
        Ok((self.inv(false, y)?, self.inv(true, y)?))
    }

    /// The xor offset between claw members, when the backend has one.
    pub fn claw_mask(&self) -> Option<u64> {
        match &self.kind {
            SecretKind::Ideal(s) => Some(s.delta),
            #[cfg(feature = "lwe")]
            SecretKind::Lwe(_) => None,
        }
    }
}
