//! Quantum ciphertexts and the pad-tracking evaluator.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits;
use crate::qsim::{gates, CMatrix, Observable, PauliKey, StateVector, EIGEN_CLUSTER_TOL};

use super::{ClassicalCiphertext, EvalKey, QfheError, QfheSecretKey, Result, SecretMaterial};

/// `(X^x Z^z |psi>, Enc(x, z))`.
#[derive(Debug, Clone)]
pub struct QfheCiphertext {
    padded_state: StateVector,
    pad_hat: ClassicalCiphertext,
}

/// Loggable view of a quantum ciphertext.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumCipherLog {
    pub pad_hat: ClassicalCiphertext,
    pub state_digest: String,
}

impl QfheCiphertext {
    pub fn padded_state(&self) -> &StateVector {
        &self.padded_state
    }

    pub fn pad_hat(&self) -> &ClassicalCiphertext {
        &self.pad_hat
    }

    /// SHA-256 over the register dimensions and amplitudes.
    pub fn state_digest(&self) -> String {
        let mut h = Sha256::new();
        for &d in self.padded_state.dims() {
            h.update((d as u64).to_le_bytes());
        }
        for a in self.padded_state.amps() {
            h.update(a.re.to_le_bytes());
            h.update(a.im.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn log(&self) -> QuantumCipherLog {
        QuantumCipherLog {
            pad_hat: self.pad_hat.clone(),
            state_digest: self.state_digest(),
        }
    }
}

/// One step of a quantum circuit. Register indices refer to the ciphertext
/// state; every register must be a qubit.
#[derive(Debug, Clone)]
pub enum QOp {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    /// Arbitrary unitary, evaluated by removing and restoring the pad.
    Unitary {
        matrix: CMatrix,
        targets: Vec<usize>,
    },
    /// Measure `observable`; the outcome is emitted as the index of its
    /// eigenvalue in `labels`.
    Measure {
        observable: Observable,
        targets: Vec<usize>,
        labels: Vec<i64>,
    },
    /// The classical input bits at `selector` (most significant first)
    /// pick a branch; its observables are measured in order.
    MeasureSelected {
        selector: Vec<usize>,
        branches: Vec<Vec<Observable>>,
        targets: Vec<usize>,
        labels: Vec<i64>,
    },
}

#[derive(Debug, Clone)]
pub struct QCircuit {
    classical_inputs: usize,
    ops: Vec<QOp>,
}

impl QCircuit {
    pub fn new(classical_inputs: usize, ops: Vec<QOp>) -> Result<Self> {
        for op in &ops {
            if let QOp::MeasureSelected {
                selector, branches, ..
            } = op
            {
                if let Some(&bad) = selector.iter().find(|&&w| w >= classical_inputs) {
                    return Err(QfheError::BadWire(bad));
                }
                let len = branches.first().map_or(0, Vec::len);
                if branches.iter().any(|b| b.len() != len) {
                    return Err(QfheError::RaggedBranches);
                }
            }
        }
        Ok(Self {
            classical_inputs,
            ops,
        })
    }

    pub fn classical_inputs(&self) -> usize {
        self.classical_inputs
    }

    pub fn ops(&self) -> &[QOp] {
        &self.ops
    }

    /// Number of classical output bits.
    pub fn output_bits(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op {
                QOp::Measure { labels, .. } => bits::width_for(labels.len()),
                QOp::MeasureSelected {
                    branches, labels, ..
                } => branches.first().map_or(0, Vec::len) * bits::width_for(labels.len()),
                _ => 0,
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub ciphertext: QfheCiphertext,
    pub outputs: ClassicalCiphertext,
}

fn check_qubits(state: &StateVector) -> Result<()> {
    if state.dims().iter().all(|&d| d == 2) {
        Ok(())
    } else {
        Err(QfheError::NonQubit)
    }
}

impl SecretMaterial {
    fn wrap_key<R: Rng + ?Sized>(
        &self,
        padded_state: StateVector,
        key: &PauliKey,
        rng: &mut R,
    ) -> QfheCiphertext {
        QfheCiphertext {
            padded_state,
            pad_hat: self.enc_bits(&key.to_bits(), rng),
        }
    }

    fn pad_key(&self, c: &QfheCiphertext) -> Result<PauliKey> {
        Ok(PauliKey::from_bits(&self.dec_bits(&c.pad_hat)?)?)
    }
}

impl QfheSecretKey {
    /// Pad every qubit of `psi` with a fresh uniform Pauli key.
    pub fn enc_quantum<R: Rng + ?Sized>(
        &self,
        psi: &StateVector,
        rng: &mut R,
    ) -> Result<QfheCiphertext> {
        check_qubits(psi)?;
        let key = PauliKey::random(psi.num_registers(), rng);
        self.enc_quantum_with_key(psi, &key, rng)
    }

    pub(crate) fn enc_quantum_with_key<R: Rng + ?Sized>(
        &self,
        psi: &StateVector,
        key: &PauliKey,
        rng: &mut R,
    ) -> Result<QfheCiphertext> {
        check_qubits(psi)?;
        let all: Vec<usize> = (0..psi.num_registers()).collect();
        let padded = psi.apply_pauli_pad(key, &all)?;
        Ok(self.inner.wrap_key(padded, key, rng))
    }

    /// The pad key carried by `c`.
    pub fn pad_key(&self, c: &QfheCiphertext) -> Result<PauliKey> {
        self.inner.pad_key(c)
    }

    pub fn dec_quantum(&self, c: &QfheCiphertext) -> Result<StateVector> {
        let key = self.pad_key(c)?;
        let all: Vec<usize> = (0..c.padded_state.num_registers()).collect();
        Ok(c.padded_state.apply_pauli_pad(&key, &all)?)
    }
}

/// Padded state plus the key the executor is tracking.
struct PaddedRun {
    state: StateVector,
    key: PauliKey,
}

impl PaddedRun {
    fn all(&self) -> Vec<usize> {
        (0..self.state.num_registers()).collect()
    }

    fn gate(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        self.state = self.state.apply_unitary(u, targets)?;
        Ok(())
    }

    /// Remove the pad, apply `u`, restore the same pad.
    fn through_plaintext(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        let all = self.all();
        let plain = self.state.apply_pauli_pad(&self.key, &all)?;
        let moved = plain.apply_unitary(u, targets)?;
        self.state = moved.apply_pauli_pad(&self.key, &all)?;
        Ok(())
    }

    /// Measure `U_k O U_k†` on the padded state, then add a fresh pad.
    fn measure<R: Rng + ?Sized>(
        &mut self,
        observable: &Observable,
        targets: &[usize],
        labels: &[i64],
        rng: &mut R,
    ) -> Result<usize> {
        let local = self.key.select(targets).matrix();
        let conjugated = observable.conjugated(&local);
        let (value, post) = self.state.measure_observable(&conjugated, targets, rng)?;
        let index = labels
            .iter()
            .position(|&l| (l as f64 - value).abs() <= EIGEN_CLUSTER_TOL)
            .ok_or(QfheError::UnlabelledOutcome(value))?;
        let fresh = PauliKey::random(self.key.len(), rng);
        self.state = post.apply_pauli_pad(&fresh, &self.all())?;
        self.key = self.key.compose(&fresh)?;
        Ok(index)
    }
}

impl EvalKey {
    /// Encrypt a state as any evaluator can: a fresh uniform pad whose key
    /// is encrypted like any other classical data.
    pub fn enc_quantum<R: Rng + ?Sized>(
        &self,
        psi: &StateVector,
        rng: &mut R,
    ) -> Result<QfheCiphertext> {
        check_qubits(psi)?;
        let key = PauliKey::random(psi.num_registers(), rng);
        let all: Vec<usize> = (0..psi.num_registers()).collect();
        let padded = psi.apply_pauli_pad(&key, &all)?;
        Ok(self.inner.wrap_key(padded, &key, rng))
    }

    /// Run `circuit` on a quantum ciphertext with encrypted classical
    /// inputs. Measurement outcomes come back encrypted; the returned
    /// quantum ciphertext carries a fresh pad.
    pub fn eval<R: Rng + ?Sized>(
        &self,
        circuit: &QCircuit,
        classical_in: &ClassicalCiphertext,
        ct: &QfheCiphertext,
        rng: &mut R,
    ) -> Result<EvalOutput> {
        let id = self.inner.key_id;
        if classical_in.key_id != id || ct.pad_hat.key_id != id {
            return Err(QfheError::ForeignCiphertext);
        }
        if classical_in.len() != circuit.classical_inputs {
            return Err(QfheError::InputLength {
                expected: circuit.classical_inputs,
                found: classical_in.len(),
            });
        }
        check_qubits(&ct.padded_state)?;
        let input = self.inner.dec_bits(classical_in)?;
        let mut run = PaddedRun {
            state: ct.padded_state.clone(),
            key: self.inner.pad_key(ct)?,
        };
        let mut out = Vec::with_capacity(circuit.output_bits());
        for op in &circuit.ops {
            match op {
                QOp::H(q) => {
                    run.gate(&gates::hadamard(), &[*q])?;
                    let (x, z) = (run.key.x()[*q], run.key.z()[*q]);
                    run.key.x_mut()[*q] = z;
                    run.key.z_mut()[*q] = x;
                }
                QOp::S(q) => {
                    run.gate(&gates::phase_s(), &[*q])?;
                    let x = run.key.x()[*q];
                    run.key.z_mut()[*q] ^= x;
                }
                QOp::X(q) => run.gate(&gates::pauli_x(), &[*q])?,
                QOp::Z(q) => run.gate(&gates::pauli_z(), &[*q])?,
                QOp::Cnot(c, t) => {
                    run.gate(&gates::cnot(), &[*c, *t])?;
                    let xc = run.key.x()[*c];
                    let zt = run.key.z()[*t];
                    run.key.x_mut()[*t] ^= xc;
                    run.key.z_mut()[*c] ^= zt;
                }
                QOp::Unitary { matrix, targets } => run.through_plaintext(matrix, targets)?,
                QOp::Measure {
                    observable,
                    targets,
                    labels,
                } => {
                    let index = run.measure(observable, targets, labels, rng)?;
                    out.extend(bits::to_vec(index as u64, bits::width_for(labels.len())));
                }
                QOp::MeasureSelected {
                    selector,
                    branches,
                    targets,
                    labels,
                } => {
                    let chosen: Vec<bool> = selector.iter().map(|&w| input[w]).collect();
                    let branch = bits::from_slice(&chosen) as usize;
                    let observables =
                        branches.get(branch).ok_or(QfheError::BadSelector(branch))?;
                    for o in observables {
                        let index = run.measure(o, targets, labels, rng)?;
                        out.extend(bits::to_vec(index as u64, bits::width_for(labels.len())));
                    }
                }
            }
        }
        Ok(EvalOutput {
            ciphertext: self.inner.wrap_key(run.state, &run.key, rng),
            outputs: self.inner.enc_bits(&out, rng),
        })
    }
}
