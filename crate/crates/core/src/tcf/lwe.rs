//! Toy noisy backend in the shape of the LWE claw-free family.
//!
//! A domain point is `(mu, v)` with `mu` the leading bit and `v` in `Z_q`,
//! `q = 2^t`. With `w = (q/2, ..., q/2)` and `u = a*s + sigma*w`,
//!
//! `f_b(mu, v) = a*v + b*u + mu*w + e  (mod q)`,  `e` uniform in `[-B, B]^m`.
//!
//! Since `2w = 0 mod q`, `f_1(mu, v)` and `f_0(mu ^ sigma, v + s)` have the
//! same distribution, so every claw has leading bits differing by `sigma`.
//! Parameters are far too small to be hard; inversion is exhaustive.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;

use super::{Image, Result, TcfError};

/// Number of samples (image coordinates).
pub const SAMPLES: usize = 4;
/// Noise half-width `B`.
pub const NOISE_BOUND: i64 = 1;
/// Smallest value width; below this `q/2` is not separated from the noise.
pub const MIN_VALUE_BITS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwePublic {
    pub(crate) value_bits: usize,
    pub(crate) a: Vec<u64>,
    pub(crate) u: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LweSecret {
    pub(crate) s: u64,
    pub(crate) sigma: bool,
    pub(crate) public: LwePublic,
}

/// Domain width for a security parameter.
pub fn domain_bits_for(lambda: usize) -> usize {
    1 + lambda.saturating_sub(1).max(MIN_VALUE_BITS)
}

fn centered(v: u64, q: u64) -> i64 {
    let v = (v % q) as i64;
    let q = q as i64;
    if v > q / 2 {
        v - q
    } else {
        v
    }
}

impl LwePublic {
    fn modulus(&self) -> u64 {
        1u64 << self.value_bits
    }

    fn domain_bits(&self) -> usize {
        self.value_bits + 1
    }

    /// Noise-free image.
    fn center(&self, b: bool, x: u64) -> Vec<u64> {
        let q = self.modulus();
        let n = self.domain_bits();
        let mu = u64::from(bits::first(x, n));
        let v = bits::trailing(x, n);
        (0..SAMPLES)
            .map(|i| {
                let mut y = self.a[i].wrapping_mul(v) + mu * (q / 2);
                if b {
                    y += self.u[i];
                }
                y % q
            })
            .collect()
    }

    fn offsets() -> Vec<Vec<i64>> {
        let width = (2 * NOISE_BOUND + 1) as usize;
        (0..width.pow(SAMPLES as u32))
            .map(|mut k| {
                (0..SAMPLES)
                    .map(|_| {
                        let e = (k % width) as i64 - NOISE_BOUND;
                        k /= width;
                        e
                    })
                    .collect()
            })
            .collect()
    }

    fn shift(&self, center: &[u64], e: &[i64]) -> Image {
        let q = self.modulus() as i64;
        Image(
            center
                .iter()
                .zip(e)
                .map(|(&c, &e)| (c as i64 + e).rem_euclid(q) as u64)
                .collect(),
        )
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, b: bool, x: u64, rng: &mut R) -> (Image, f64) {
        let center = self.center(b, x);
        let e: Vec<i64> = (0..SAMPLES)
            .map(|_| rng.random_range(-NOISE_BOUND..=NOISE_BOUND))
            .collect();
        (self.shift(&center, &e), self.noise_density())
    }

    pub(crate) fn noise_density(&self) -> f64 {
        1.0 / ((2 * NOISE_BOUND + 1) as f64).powi(SAMPLES as i32)
    }

    pub(crate) fn support(&self, b: bool, x: u64) -> Vec<(Image, f64)> {
        let center = self.center(b, x);
        let p = self.noise_density();
        Self::offsets()
            .iter()
            .map(|e| (self.shift(&center, e), p))
            .collect()
    }

    pub(crate) fn chk(&self, b: bool, x: u64, y: &Image) -> bool {
        if y.0.len() != SAMPLES || y.0.iter().any(|&v| v >= self.modulus()) {
            return false;
        }
        let q = self.modulus();
        self.center(b, x)
            .iter()
            .zip(&y.0)
            .all(|(&c, &v)| centered(v + q - c, q).abs() <= NOISE_BOUND)
    }

    pub(crate) fn preimages(&self, y: &Image) -> Vec<(bool, u64, f64)> {
        let p = self.noise_density();
        let mut out = Vec::new();
        for b in [false, true] {
            for x in 0..(1u64 << self.domain_bits()) {
                if self.chk(b, x, y) {
                    out.push((b, x, p));
                }
            }
        }
        out
    }

    pub(crate) fn image_alphabet_size(&self) -> usize {
        (self.modulus() as usize).pow(SAMPLES as u32)
    }

    pub(crate) fn image_index(&self, y: &Image) -> usize {
        let q = self.modulus() as usize;
        y.0.iter().fold(0usize, |acc, &v| acc * q + v as usize)
    }
}

/// Injective iff no nonzero domain difference maps inside twice the noise box.
fn separates(a: &[u64], value_bits: usize) -> bool {
    let q = 1u64 << value_bits;
    for dmu in 0..2u64 {
        for dv in 0..q {
            if dmu == 0 && dv == 0 {
                continue;
            }
            let far = a
                .iter()
                .any(|&ai| centered(ai.wrapping_mul(dv) + dmu * (q / 2), q).abs() > 2 * NOISE_BOUND);
            if !far {
                return false;
            }
        }
    }
    true
}

pub(crate) fn gen<R: Rng + ?Sized>(
    lambda: usize,
    hidden: Option<bool>,
    rng: &mut R,
) -> Result<(LwePublic, LweSecret)> {
    let value_bits = domain_bits_for(lambda) - 1;
    let q = 1u64 << value_bits;
    let a = (0..1000)
        .map(|_| (0..SAMPLES).map(|_| rng.random_range(0..q)).collect::<Vec<u64>>())
        .find(|a| separates(a, value_bits))
        .ok_or(TcfError::KeyGeneration)?;
    let s = rng.random_range(0..q);
    let sigma = hidden.unwrap_or_else(|| rng.random());
    let u = a
        .iter()
        .map(|&ai| (ai.wrapping_mul(s) + u64::from(sigma) * (q / 2)) % q)
        .collect();
    let public = LwePublic { value_bits, a, u };
    Ok((
        public.clone(),
        LweSecret {
            s,
            sigma,
            public,
        },
    ))
}

impl LweSecret {
    pub(crate) fn inv(&self, b: bool, y: &Image) -> Result<u64> {
        (0..(1u64 << self.public.domain_bits()))
            .find(|&x| self.public.chk(b, x, y))
            .ok_or(TcfError::NotInImage)
    }
}
