use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{gates, CMatrix, QsimError, Result};

/// Pauli pad key `(x, z)` selecting `X^x Z^z` on each padded qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliKey {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliKey {
    pub fn new(x: Vec<bool>, z: Vec<bool>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(QsimError::KeyLength {
                key: x.len(),
                targets: z.len(),
            });
        }
        Ok(Self { x, z })
    }

    pub fn identity(qubits: usize) -> Self {
        Self {
            x: vec![false; qubits],
            z: vec![false; qubits],
        }
    }

    pub fn random<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Self {
        Self {
            x: (0..qubits).map(|_| rng.random()).collect(),
            z: (0..qubits).map(|_| rng.random()).collect(),
        }
    }

    /// Number of padded qubits.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn x_mut(&mut self) -> &mut [bool] {
        &mut self.x
    }

    pub fn z_mut(&mut self) -> &mut [bool] {
        &mut self.z
    }

    /// Key of the product pad, up to global phase.
    pub fn compose(&self, other: &PauliKey) -> Result<PauliKey> {
        if self.len() != other.len() {
            return Err(QsimError::KeyLength {
                key: other.len(),
                targets: self.len(),
            });
        }
        Ok(PauliKey {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Flattened as all `x` bits followed by all `z` bits.
    pub fn to_bits(&self) -> Vec<bool> {
        self.x.iter().chain(&self.z).copied().collect()
    }

    /// Dense matrix of `X^x Z^z` on each qubit, first qubit most significant.
    pub fn matrix(&self) -> CMatrix {
        if self.is_empty() {
            return gates::identity(1);
        }
        let factors: Vec<CMatrix> = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| {
                let xm = if x { gates::pauli_x() } else { gates::identity(2) };
                let zm = if z { gates::pauli_z() } else { gates::identity(2) };
                xm * zm
            })
            .collect();
        gates::kron_all(&factors)
    }

    /// Restriction to the listed positions.
    pub fn select(&self, positions: &[usize]) -> PauliKey {
        PauliKey {
            x: positions.iter().map(|&p| self.x[p]).collect(),
            z: positions.iter().map(|&p| self.z[p]).collect(),
        }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(QsimError::KeyLength {
                key: bits.len(),
                targets: bits.len() + 1,
            });
        }
        let n = bits.len() / 2;
        Ok(Self {
            x: bits[..n].to_vec(),
            z: bits[n..].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_is_xor() {
        let a = PauliKey::new(vec![true, false], vec![true, true]).unwrap();
        let b = PauliKey::new(vec![true, true], vec![false, true]).unwrap();
        let c = a.compose(&b).unwrap();
        assert_eq!(c.x(), &[false, true]);
        assert_eq!(c.z(), &[true, false]);
    }

    #[test]
    fn bits_round_trip() {
        let k = PauliKey::new(vec![true, false, true], vec![false, false, true]).unwrap();
        assert_eq!(PauliKey::from_bits(&k.to_bits()).unwrap(), k);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(PauliKey::new(vec![true], vec![]).is_err());
    }
}
