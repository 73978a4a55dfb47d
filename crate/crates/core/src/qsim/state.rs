use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_unitary, gates, sample_index, CMatrix, Observable, PauliKey, QsimError, Result, C64,
    CHECK_TOL,
};

/// Measurement basis for register readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Standard,
    /// Per-qubit Hadamard basis; only valid on qubit registers.
    Hadamard,
}

/// Unit vector over a composite register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

/// Index arithmetic for a set of target registers.
struct Layout {
    /// Offsets of every target sub-index, first target most significant.
    offsets: Vec<usize>,
    /// Indices whose target digits are all zero.
    bases: Vec<usize>,
}

impl StateVector {
    /// Build from amplitudes that must already be normalized.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > CHECK_TOL {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Build from amplitudes, rescaling to unit norm.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if norm <= 1e-300 {
            return Err(QsimError::ZeroProbability);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(QsimError::BadRegister);
        }
        let expected: usize = dims.iter().product();
        if amps.len() != expected {
            return Err(QsimError::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        Ok(Self { dims, amps })
    }

    /// Computational basis state `|digits>`.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() {
            return Err(QsimError::DimensionMismatch {
                expected: dims.len(),
                found: digits.len(),
            });
        }
        let len: usize = dims.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); len];
        let mut index = 0;
        for (&d, &digit) in dims.iter().zip(digits) {
            if digit >= d {
                return Err(QsimError::DimensionMismatch {
                    expected: d,
                    found: digit,
                });
            }
            index = index * d + digit;
        }
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims.to_vec(), amps)
    }

    /// All registers in `|0>`.
    pub fn zero(dims: &[usize]) -> Result<Self> {
        Self::basis(dims, &vec![0; dims.len()])
    }

    /// `n` qubits in `|0...0>`.
    pub fn qubits(n: usize) -> Self {
        Self::zero(&vec![2; n]).expect("qubit registers are valid")
    }

    /// Single qubit `a|0> + b|1>`, normalized.
    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::normalized(vec![2], vec![a, b])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_registers(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Digits of a basis index, register 0 first.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (slot, &d) in digits.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.dims.len() {
                return Err(QsimError::RegisterOutOfRange {
                    index: t,
                    count: self.dims.len(),
                });
            }
            if targets[..i].contains(&t) {
                return Err(QsimError::DuplicateTarget(t));
            }
        }
        Ok(())
    }

    fn check_qubits(&self, targets: &[usize]) -> Result<()> {
        for &t in targets {
            if self.dims[t] != 2 {
                return Err(QsimError::NotQubit {
                    index: t,
                    dim: self.dims[t],
                });
            }
        }
        Ok(())
    }

    fn layout(&self, targets: &[usize]) -> Result<Layout> {
        self.check_targets(targets)?;
        let strides = self.strides();
        let sub_dim: usize = targets.iter().map(|&t| self.dims[t]).product();
        let mut offsets = Vec::with_capacity(sub_dim);
        for s in 0..sub_dim {
            let mut rem = s;
            let mut off = 0;
            for &t in targets.iter().rev() {
                off += (rem % self.dims[t]) * strides[t];
                rem /= self.dims[t];
            }
            offsets.push(off);
        }
        let bases = (0..self.amps.len())
            .filter(|&i| targets.iter().all(|&t| (i / strides[t]).is_multiple_of(self.dims[t])))
            .collect();
        Ok(Layout { offsets, bases })
    }

    /// Dimension of the subspace spanned by `targets`.
    pub fn subspace_dim(&self, targets: &[usize]) -> Result<usize> {
        self.check_targets(targets)?;
        Ok(targets.iter().map(|&t| self.dims[t]).product())
    }

    /// Apply an arbitrary square matrix on `targets` without renormalizing.
    fn apply_matrix(&self, m: &CMatrix, targets: &[usize]) -> Result<Self> {
        let layout = self.layout(targets)?;
        let sub = layout.offsets.len();
        if m.nrows() != sub || m.ncols() != sub {
            return Err(QsimError::DimensionMismatch {
                expected: sub,
                found: m.nrows(),
            });
        }
        let mut out = self.amps.clone();
        let mut local = vec![C64::new(0.0, 0.0); sub];
        for &base in &layout.bases {
            for (slot, &off) in local.iter_mut().zip(&layout.offsets) {
                *slot = self.amps[base + off];
            }
            for (r, &off) in layout.offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (col, &v) in local.iter().enumerate() {
                    acc += m[(r, col)] * v;
                }
                out[base + off] = acc;
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: out,
        })
    }

    pub fn apply_unitary(&self, u: &CMatrix, targets: &[usize]) -> Result<Self> {
        check_unitary(u)?;
        self.apply_matrix(u, targets)
    }

    /// Project onto `projector` on `targets`, returning the Born probability
    /// and the renormalized post-measurement state when it is nonzero.
    pub fn project(&self, projector: &CMatrix, targets: &[usize]) -> Result<(f64, Option<Self>)> {
        let raw = self.apply_matrix(projector, targets)?;
        let prob = raw.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if prob <= 1e-15 {
            return Ok((0.0, None));
        }
        let scale = prob.sqrt();
        let amps = raw.amps.into_iter().map(|a| a / scale).collect();
        Ok((
            prob,
            Some(Self {
                dims: self.dims.clone(),
                amps,
            }),
        ))
    }

    /// Born distribution `(eigenvalue, probability)` of `obs` on `targets`.
    pub fn outcome_distribution(
        &self,
        obs: &Observable,
        targets: &[usize],
    ) -> Result<Vec<(f64, f64)>> {
        obs.eigenspaces()
            .iter()
            .map(|e| Ok((e.value, self.project(&e.projector, targets)?.0)))
            .collect()
    }

    pub fn measure_observable<R: Rng + ?Sized>(
        &self,
        obs: &Observable,
        targets: &[usize],
        rng: &mut R,
    ) -> Result<(f64, Self)> {
        let sub = self.subspace_dim(targets)?;
        if obs.dim() != sub {
            return Err(QsimError::DimensionMismatch {
                expected: sub,
                found: obs.dim(),
            });
        }
        let branches: Vec<(f64, f64, Option<Self>)> = obs
            .eigenspaces()
            .iter()
            .map(|e| {
                let (p, post) = self.project(&e.projector, targets)?;
                Ok((e.value, p, post))
            })
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = branches.iter().map(|b| b.1).collect();
        let pick = sample_index(&weights, rng);
        let (value, _, post) = branches.into_iter().nth(pick).expect("index in range");
        Ok((value, post.ok_or(QsimError::ZeroProbability)?))
    }

    /// Marginal distribution of the digits of `targets`, first target most
    /// significant.
    pub fn register_probabilities(&self, targets: &[usize]) -> Result<Vec<f64>> {
        let layout = self.layout(targets)?;
        let mut probs = vec![0.0; layout.offsets.len()];
        for &base in &layout.bases {
            for (p, &off) in probs.iter_mut().zip(&layout.offsets) {
                *p += self.amps[base + off].norm_sqr();
            }
        }
        Ok(probs)
    }

    fn hadamard_all(&self, targets: &[usize]) -> Result<Self> {
        self.check_qubits(targets)?;
        let h = gates::hadamard();
        targets
            .iter()
            .try_fold(self.clone(), |s, &t| s.apply_matrix(&h, &[t]))
    }

    fn split_sub_index(&self, targets: &[usize], mut s: usize) -> Vec<usize> {
        let mut digits = vec![0; targets.len()];
        for (slot, &t) in digits.iter_mut().zip(targets).rev() {
            *slot = s % self.dims[t];
            s /= self.dims[t];
        }
        digits
    }

    /// Standard-basis collapse of `targets` onto a sampled outcome.
    fn collapse<R: Rng + ?Sized>(&self, targets: &[usize], rng: &mut R) -> Result<(usize, Self)> {
        let layout = self.layout(targets)?;
        let mut probs = vec![0.0; layout.offsets.len()];
        for &base in &layout.bases {
            for (p, &off) in probs.iter_mut().zip(&layout.offsets) {
                *p += self.amps[base + off].norm_sqr();
            }
        }
        let pick = sample_index(&probs, rng);
        let scale = probs[pick].sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for &base in &layout.bases {
            let i = base + layout.offsets[pick];
            amps[i] = self.amps[i] / scale;
        }
        Ok((
            pick,
            Self {
                dims: self.dims.clone(),
                amps,
            },
        ))
    }

    /// Measure `targets` digit-wise. In the Hadamard basis the collapsed
    /// registers are left in the corresponding Hadamard eigenstates.
    pub fn measure_registers<R: Rng + ?Sized>(
        &self,
        targets: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<(Vec<usize>, Self)> {
        match basis {
            Basis::Standard => {
                let (pick, post) = self.collapse(targets, rng)?;
                Ok((self.split_sub_index(targets, pick), post))
            }
            Basis::Hadamard => {
                let rotated = self.hadamard_all(targets)?;
                let (pick, post) = rotated.collapse(targets, rng)?;
                Ok((self.split_sub_index(targets, pick), post.hadamard_all(targets)?))
            }
        }
    }

    /// Measure `targets` and remove them from the register list.
    pub fn measure_and_discard<R: Rng + ?Sized>(
        &self,
        targets: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<(Vec<usize>, Self)> {
        let rotated = match basis {
            Basis::Standard => {
                self.check_targets(targets)?;
                self.clone()
            }
            Basis::Hadamard => self.hadamard_all(targets)?,
        };
        let (pick, post) = rotated.collapse(targets, rng)?;
        let digits = self.split_sub_index(targets, pick);
        Ok((digits.clone(), post.discard_known(targets, &digits)?))
    }

    /// Drop registers known to be in the basis state `digits`.
    pub fn discard_known(&self, targets: &[usize], digits: &[usize]) -> Result<Self> {
        self.check_targets(targets)?;
        let keep: Vec<usize> = (0..self.dims.len())
            .filter(|i| !targets.contains(i))
            .collect();
        if keep.is_empty() {
            return Err(QsimError::BadRegister);
        }
        let new_dims: Vec<usize> = keep.iter().map(|&i| self.dims[i]).collect();
        let len: usize = new_dims.iter().product();
        let mut amps = Vec::with_capacity(len);
        let strides = self.strides();
        let fixed: usize = targets
            .iter()
            .zip(digits)
            .map(|(&t, &d)| d * strides[t])
            .sum();
        for j in 0..len {
            let mut rem = j;
            let mut idx = fixed;
            for &k in keep.iter().rev() {
                idx += (rem % self.dims[k]) * strides[k];
                rem /= self.dims[k];
            }
            amps.push(self.amps[idx]);
        }
        Self::normalized(new_dims, amps)
    }

    /// `self ⊗ other`, with `other` as the less significant registers.
    pub fn tensor(&self, other: &StateVector) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, amps }
    }

    /// Apply `X^x Z^z` to each target qubit (Z acts first).
    pub fn apply_pauli_pad(&self, key: &PauliKey, targets: &[usize]) -> Result<Self> {
        if key.len() != targets.len() {
            return Err(QsimError::KeyLength {
                key: key.len(),
                targets: targets.len(),
            });
        }
        self.check_targets(targets)?;
        self.check_qubits(targets)?;
        let strides = self.strides();
        let mut amps = self.amps.clone();
        for (j, &t) in targets.iter().enumerate() {
            let stride = strides[t];
            if key.z()[j] {
                for (i, a) in amps.iter_mut().enumerate() {
                    if (i / stride) % 2 == 1 {
                        *a = -*a;
                    }
                }
            }
            if key.x()[j] {
                for i in 0..amps.len() {
                    if (i / stride).is_multiple_of(2) {
                        amps.swap(i, i + stride);
                    }
                }
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(QsimError::DimensionMismatch {
                expected: self.amps.len(),
                found: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// True iff `|<self|other>| >= 1 - tol`.
    pub fn equal_up_to_global_phase(&self, other: &StateVector, tol: f64) -> Result<bool> {
        Ok(self.inner(other)?.norm() >= 1.0 - tol)
    }
}
