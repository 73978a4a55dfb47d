//! Fixed-width bit strings packed into `u64`.
//!
//! Bit 0 of a string is its most significant bit, so `first` reads the
//! leading bit of an `n`-bit string.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Inner product mod 2.
pub fn dot(a: u64, b: u64) -> bool {
    (a & b).count_ones() % 2 == 1
}

/// Mask with the low `n` bits set.
pub fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Leading bit of an `n`-bit string.
pub fn first(x: u64, n: usize) -> bool {
    n > 0 && (x >> (n - 1)) & 1 == 1
}

/// The `n - 1` trailing bits of an `n`-bit string.
pub fn trailing(x: u64, n: usize) -> u64 {
    x & mask(n.saturating_sub(1))
}

/// Bit `i` counted from the most significant end.
pub fn bit(x: u64, n: usize, i: usize) -> bool {
    (x >> (n - 1 - i)) & 1 == 1
}

/// Unpack into `n` booleans, most significant first.
pub fn to_vec(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bit(x, n, i)).collect()
}

/// Pack booleans, most significant first.
pub fn from_slice(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

/// Uniform `n`-bit string.
pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> u64 {
    rng.random::<u64>() & mask(n)
}

/// Uniform nonzero `n`-bit string. `n` must be positive.
pub fn random_nonzero<R: Rng + ?Sized>(n: usize, rng: &mut R) -> u64 {
    assert!(n > 0, "no nonzero strings of width 0");
    loop {
        let x = random(n, rng);
        if x != 0 {
            return x;
        }
    }
}

/// Number of bits needed to index `count` items (at least 1).
pub fn width_for(count: usize) -> usize {
    let mut w = 1;
    while (1usize << w) < count {
        w += 1;
    }
    w
}

/// A bit string with an explicit width, serialized as lowercase hex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    pub value: u64,
    pub width: usize,
}

impl BitString {
    pub fn new(value: u64, width: usize) -> Self {
        Self {
            value: value & mask(width),
            width,
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        to_vec(self.value, self.width)
    }
}

#[derive(Serialize, Deserialize)]
struct BitStringRepr {
    hex: String,
    width: usize,
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BitStringRepr {
            hex: hex::encode(self.value.to_be_bytes()),
            width: self.width,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = BitStringRepr::deserialize(d)?;
        let bytes = hex::decode(&repr.hex).map_err(serde::de::Error::custom)?;
        let arr: [u8; 8] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected 8 hex-encoded bytes"))?;
        Ok(BitString::new(u64::from_be_bytes(arr), repr.width))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_and_trailing_split_the_string() {
        let x = 0b1011;
        assert!(first(x, 4));
        assert_eq!(trailing(x, 4), 0b011);
        assert!(!first(0b0111, 4));
    }

    #[test]
    fn vec_round_trip() {
        for x in 0..64u64 {
            assert_eq!(from_slice(&to_vec(x, 6)), x);
        }
    }

    #[test]
    fn dot_is_parity_of_overlap() {
        assert!(!dot(0b11, 0b11));
        assert!(dot(0b10, 0b11));
        assert!(!dot(0, 0b1111));
    }

    #[test]
    fn width_for_small_counts() {
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(2), 1);
        assert_eq!(width_for(3), 2);
        assert_eq!(width_for(9), 4);
    }

    #[test]
    fn bitstring_serializes_as_hex() {
        let b = BitString::new(0xab, 8);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("00000000000000ab"));
        let back: BitString = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }
}
