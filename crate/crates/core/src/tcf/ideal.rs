//! Exact claw backend: `f_b(x) = P(x ^ b * delta)` for a secret random
//! injection `P` from `n` bits into `n + 2` bits.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;

use super::{Image, Result, TcfError};

/// Extra image bits, so most `(n + 2)`-bit strings are not images.
pub const IMAGE_EXTRA_BITS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealPublic {
    pub(crate) table0: Vec<u64>,
    pub(crate) table1: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealSecret {
    pub(crate) delta: u64,
    /// `(P(x), x)` sorted by image.
    pub(crate) inverse: Vec<(u64, u64)>,
}

pub(crate) fn gen<R: Rng + ?Sized>(
    n: usize,
    hidden: Option<bool>,
    rng: &mut R,
) -> (IdealPublic, IdealSecret) {
    let domain = 1usize << n;
    let range = 1usize << (n + IMAGE_EXTRA_BITS);
    let injection: Vec<u64> = index::sample(rng, range, domain)
        .into_iter()
        .map(|y| y as u64)
        .collect();
    let delta = match hidden {
        Some(s) => (u64::from(s) << (n - 1)) | bits::random_nonzero(n - 1, rng),
        None => bits::random_nonzero(n, rng),
    };
    let table0 = injection.clone();
    let table1 = (0..domain as u64)
        .map(|x| injection[(x ^ delta) as usize])
        .collect();
    let mut inverse: Vec<(u64, u64)> = injection
        .iter()
        .enumerate()
        .map(|(x, &y)| (y, x as u64))
        .collect();
    inverse.sort_unstable();
    (IdealPublic { table0, table1 }, IdealSecret { delta, inverse })
}

impl IdealPublic {
    pub(crate) fn eval(&self, b: bool, x: u64) -> Image {
        let table = if b { &self.table1 } else { &self.table0 };
        Image::scalar(table[x as usize])
    }

    pub(crate) fn preimages(&self, y: &Image) -> Vec<(bool, u64, f64)> {
        let Some(target) = y.as_scalar() else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(2);
        for (b, table) in [(false, &self.table0), (true, &self.table1)] {
            if let Some(x) = table.iter().position(|&v| v == target) {
                out.push((b, x as u64, 1.0));
            }
        }
        out
    }
}

impl IdealSecret {
    pub(crate) fn inv(&self, b: bool, y: &Image) -> Result<u64> {
        let target = y.as_scalar().ok_or(TcfError::NotInImage)?;
        let pos = self
            .inverse
            .binary_search_by_key(&target, |&(img, _)| img)
            .map_err(|_| TcfError::NotInImage)?;
        let base = self.inverse[pos].1;
        Ok(if b { base ^ self.delta } else { base })
    }
}
