//! Oblivious Pauli pad built from a claw-free pair and a one-bit random
//! oracle.
//!
//! `qubit_enc` applies `X^{p_X} Z^{p_Z}` to a qubit, where each bit is
//! `p(d, x0, x1) = d.(x0 ^ x1) ^ H(x0) ^ H(x1)` for a measured image `y`
//! with claw `(x0, x1)` and a Hadamard-basis outcome `d`. The prover learns
//! `(d, y)` but not the claw; the trapdoor holder recovers the bit.

mod oracle;
mod security;

pub use oracle::{extract_claw, OracleMode, PhaseOracle};
pub use security::{
    security_game, ClawCheater, OpadGameReport, OpadProver, QuantumDistinguisher, SampThenGuess,
};

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, BitString};
use crate::qsim::{gates, Basis, CMatrix, PauliKey, QsimError, StateVector, C64};
use crate::tcf::{self, coherent_samp, samp_measure, Image, TcfBackend, TcfError, TcfKeyPair,
    TcfPublicKey, TcfSecretKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpadError {
    #[error("register {0} is not a qubit")]
    NotQubit(usize),
    #[error("key family produced a {found}-dimensional unitary, targets span {expected}")]
    FamilyDimension { expected: usize, found: usize },
    #[error("malformed prover message: {0}")]
    Malformed(String),
    #[error(transparent)]
    Tcf(#[from] TcfError),
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, OpadError>;

/// One `(d, y)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadEntry {
    pub d: BitString,
    pub y: Image,
}

/// `s_j = (d_X, y_X, d_Z, y_Z)` for one qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitPadString {
    pub x: PadEntry,
    pub z: PadEntry,
}

/// Classical output of a Pauli-pad encryption, one entry per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpadString(pub Vec<QubitPadString>);

impl OpadString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Key pair; the pad reuses the claw-free family's keys directly.
pub fn gen<R: Rng + ?Sized>(lambda: usize, backend: TcfBackend, rng: &mut R) -> Result<TcfKeyPair> {
    Ok(tcf::gen(lambda, None, backend, rng)?)
}

/// `d.(x0 ^ x1) ^ H(x0) ^ H(x1)`.
pub fn phase(oracle: &mut PhaseOracle, d: u64, x0: u64, x1: u64) -> bool {
    bits::dot(d, x0 ^ x1) ^ oracle.silent(x0) ^ oracle.silent(x1)
}

/// Multiply each amplitude by `(-1)^{H(x)}`, `x` read from the last `n`
/// qubits. Only points carrying amplitude are evaluated.
fn apply_oracle_phase(state: &StateVector, n: usize, oracle: &mut PhaseOracle) -> Result<StateVector> {
    let m = bits::mask(n);
    let amps: Vec<C64> = state
        .amps()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if a.norm_sqr() > 0.0 && oracle.silent(i as u64 & m) {
                -a
            } else {
                a
            }
        })
        .collect();
    Ok(StateVector::new(state.dims().to_vec(), amps)?)
}

fn check_qubit(state: &StateVector, target: usize) -> Result<()> {
    match state.dims().get(target) {
        Some(2) => Ok(()),
        _ => Err(OpadError::NotQubit(target)),
    }
}

/// One half of `qubit_enc`: pads `target` with `Z^p`, or with `X^p` when
/// `hadamard` is set.
fn pad_step<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    state: &StateVector,
    target: usize,
    hadamard: bool,
    oracle: &mut PhaseOracle,
    rng: &mut R,
) -> Result<(PadEntry, StateVector)> {
    let h = gates::hadamard();
    let mut s = if hadamard {
        state.apply_unitary(&h, &[target])?
    } else {
        state.clone()
    };
    let registers = s.num_registers();
    let n = pk.domain_bits();
    let (y, sampled) = samp_measure(pk, &s, target, rng)?;
    let phased = apply_oracle_phase(&sampled, n, oracle)?;
    let x_regs: Vec<usize> = (registers..registers + n).collect();
    let (digits, rest) = phased.measure_and_discard(&x_regs, Basis::Hadamard, rng)?;
    let d = digits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    s = rest;
    if hadamard {
        s = s.apply_unitary(&h, &[target])?;
    }
    Ok((
        PadEntry {
            d: BitString::new(d, n),
            y,
        },
        s,
    ))
}

/// The bit physically applied for `entry`, found by exhaustive preimage
/// search on the public key. Test instrumentation only.
fn applied_bit(pk: &TcfPublicKey, oracle: &mut PhaseOracle, entry: &PadEntry) -> Result<bool> {
    let pre = pk.preimages(&entry.y);
    let find = |b: bool| {
        pre.iter()
            .find(|(pb, _, _)| *pb == b)
            .map(|&(_, x, _)| x)
            .ok_or(TcfError::NotInImage)
    };
    Ok(phase(oracle, entry.d.value, find(false)?, find(true)?))
}

/// Pad one qubit. Returns the padded state, `s_j`, and the applied key
/// (recovered from the public key by brute force, for verification).
pub fn qubit_enc<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    state: &StateVector,
    target: usize,
    oracle: &mut PhaseOracle,
    rng: &mut R,
) -> Result<(StateVector, QubitPadString, PauliKey)> {
    check_qubit(state, target)?;
    let (z, after_z) = pad_step(pk, state, target, false, oracle, rng)?;
    let (x, after_x) = pad_step(pk, &after_z, target, true, oracle, rng)?;
    let key = PauliKey::new(
        vec![applied_bit(pk, oracle, &x)?],
        vec![applied_bit(pk, oracle, &z)?],
    )?;
    Ok((after_x, QubitPadString { x, z }, key))
}

/// Pad each target in turn.
pub fn enc<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    state: &StateVector,
    targets: &[usize],
    oracle: &mut PhaseOracle,
    rng: &mut R,
) -> Result<(StateVector, OpadString)> {
    let mut current = state.clone();
    let mut s = Vec::with_capacity(targets.len());
    for &t in targets {
        let (next, sj, _) = qubit_enc(pk, &current, t, oracle, rng)?;
        current = next;
        s.push(sj);
    }
    Ok((current, OpadString(s)))
}

fn entry_bit(sk: &TcfSecretKey, entry: &PadEntry, oracle: &mut PhaseOracle) -> Result<bool> {
    let x0 = sk.inv(false, &entry.y)?;
    let x1 = sk.inv(true, &entry.y)?;
    Ok(phase(oracle, entry.d.value, x0, x1))
}

/// Recover the Pauli key from `s` with the trapdoor.
pub fn dec(sk: &TcfSecretKey, s: &OpadString, oracle: &mut PhaseOracle) -> Result<PauliKey> {
    let mut x = Vec::with_capacity(s.len());
    let mut z = Vec::with_capacity(s.len());
    for sj in &s.0 {
        x.push(entry_bit(sk, &sj.x, oracle)?);
        z.push(entry_bit(sk, &sj.z, oracle)?);
    }
    Ok(PauliKey::new(x, z)?)
}

fn samp_entry<R: Rng + ?Sized>(pk: &TcfPublicKey, nonzero: bool, rng: &mut R) -> Result<PadEntry> {
    let n = pk.domain_bits();
    let x = rng.random_range(0..pk.domain_size());
    let (y, _) = pk.eval(false, x, rng)?;
    let d = if nonzero {
        bits::random_nonzero(n, rng)
    } else {
        bits::random(n, rng)
    };
    Ok(PadEntry {
        d: BitString::new(d, n),
        y,
    })
}

/// Classical range sampling for `qubits` qubits: `y = f_0(x)` for uniform
/// `x` and `d` uniform over the whole domain, which is exactly the
/// distribution `enc` produces.
pub fn samp<R: Rng + ?Sized>(pk: &TcfPublicKey, qubits: usize, rng: &mut R) -> Result<OpadString> {
    samp_with(pk, qubits, false, rng)
}

/// Variant drawing `d` from the nonzero strings only. Its distribution
/// differs from `enc`'s by `2^-n` in total variation per entry.
pub fn samp_nonzero<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    qubits: usize,
    rng: &mut R,
) -> Result<OpadString> {
    samp_with(pk, qubits, true, rng)
}

fn samp_with<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    qubits: usize,
    nonzero: bool,
    rng: &mut R,
) -> Result<OpadString> {
    (0..qubits)
        .map(|_| {
            Ok(QubitPadString {
                x: samp_entry(pk, nonzero, rng)?,
                z: samp_entry(pk, nonzero, rng)?,
            })
        })
        .collect::<Result<_>>()
        .map(OpadString)
}

/// Exact distribution of `(d, y)` from `samp`'s per-entry sampler.
pub fn samp_entry_distribution(pk: &TcfPublicKey, nonzero: bool) -> Result<HashMap<PadEntry, f64>> {
    let n = pk.domain_bits();
    let size = pk.domain_size();
    let d_count = if nonzero { size - 1 } else { size };
    let mut out = HashMap::new();
    for x in 0..size {
        for (y, p) in pk.support(false, x)? {
            for d in u64::from(nonzero)..size {
                let entry = PadEntry {
                    d: BitString::new(d, n),
                    y: y.clone(),
                };
                *out.entry(entry).or_default() += p / (size * d_count) as f64;
            }
        }
    }
    Ok(out)
}

/// One branch of a pad step: probability, classical output, and the
/// normalized post-measurement state.
#[derive(Debug, Clone)]
pub struct StepBranch {
    pub prob: f64,
    pub entry: PadEntry,
    pub state: StateVector,
}

/// All branches of one pad step on `state`, computed by dense simulation:
/// coherent sampling into explicit registers, image readout, oracle phase,
/// and Hadamard readout of the preimage register.
pub fn exact_step_branches(
    pk: &TcfPublicKey,
    state: &StateVector,
    target: usize,
    hadamard: bool,
    oracle: &mut PhaseOracle,
) -> Result<Vec<StepBranch>> {
    check_qubit(state, target)?;
    let h = gates::hadamard();
    let start = if hadamard {
        state.apply_unitary(&h, &[target])?
    } else {
        state.clone()
    };
    let n = pk.domain_bits();
    let k = start.num_registers();
    let image_dim = pk.image_alphabet_size();
    let workspace = start
        .tensor(&StateVector::qubits(n))
        .tensor(&StateVector::zero(&[image_dim])?);
    let x_regs: Vec<usize> = (k..k + n).collect();
    let y_reg = k + n;
    let dense = coherent_samp(pk, &workspace, target, &x_regs, &[y_reg])?;
    let y_probs = dense.register_probabilities(&[y_reg])?;
    let images = image_table(pk)?;
    let mut out = Vec::new();
    for (yi, &py) in y_probs.iter().enumerate() {
        if py <= 0.0 {
            continue;
        }
        let y = images.get(&yi).cloned().ok_or(TcfError::NotInImage)?;
        let collapsed = dense.discard_known(&[y_reg], &[yi])?;
        let phased = apply_oracle_phase(&collapsed, n, oracle)?;
        let rotated = x_regs
            .iter()
            .try_fold(phased, |s, &r| s.apply_unitary(&h, &[r]))?;
        let d_probs = rotated.register_probabilities(&x_regs)?;
        for (d, &pd) in d_probs.iter().enumerate() {
            if pd <= 1e-15 {
                continue;
            }
            let digits = bits::to_vec(d as u64, n)
                .into_iter()
                .map(usize::from)
                .collect::<Vec<_>>();
            let mut post = rotated.discard_known(&x_regs, &digits)?;
            if hadamard {
                post = post.apply_unitary(&h, &[target])?;
            }
            out.push(StepBranch {
                prob: py * pd,
                entry: PadEntry {
                    d: BitString::new(d as u64, n),
                    y: y.clone(),
                },
                state: post,
            });
        }
    }
    Ok(out)
}

/// Inverse of `image_index` over the supports of both branches.
fn image_table(pk: &TcfPublicKey) -> Result<HashMap<usize, Image>> {
    let mut table = HashMap::new();
    for b in [false, true] {
        for x in 0..pk.domain_size() {
            for (y, _) in pk.support(b, x)? {
                table.entry(pk.image_index(&y)).or_insert(y);
            }
        }
    }
    Ok(table)
}

/// Exact total-variation distance between the classical output of
/// `qubit_enc` on `psi` (target 0) and `samp` (or `samp_nonzero`) for one
/// qubit.
pub fn enc_samp_distance(
    pk: &TcfPublicKey,
    psi: &StateVector,
    oracle: &mut PhaseOracle,
    nonzero: bool,
) -> Result<f64> {
    let sampled = samp_entry_distribution(pk, nonzero)?;
    let z_branches = exact_step_branches(pk, psi, 0, false, oracle)?;
    // The second step depends on the first only through Z^p psi, so one
    // conditional distribution per distinct post-state suffices.
    let mut conditionals: Vec<(StateVector, HashMap<PadEntry, f64>)> = Vec::new();
    let mut z_dist: HashMap<PadEntry, (f64, usize)> = HashMap::new();
    for branch in &z_branches {
        let slot = match conditionals
            .iter()
            .position(|(s, _)| s.equal_up_to_global_phase(&branch.state, 1e-12).unwrap_or(false))
        {
            Some(i) => i,
            None => {
                let mut dist = HashMap::new();
                for xb in exact_step_branches(pk, &branch.state, 0, true, oracle)? {
                    *dist.entry(xb.entry).or_default() += xb.prob;
                }
                conditionals.push((branch.state.clone(), dist));
                conditionals.len() - 1
            }
        };
        let e = z_dist.entry(branch.entry.clone()).or_insert((0.0, slot));
        e.0 += branch.prob;
    }
    let mut total = 0.0;
    let z_keys: std::collections::HashSet<&PadEntry> = z_dist.keys().chain(sampled.keys()).collect();
    for z in z_keys {
        let ps = sampled.get(z).copied().unwrap_or(0.0);
        match z_dist.get(z) {
            None => total += ps,
            Some(&(pe, slot)) => {
                let cond = &conditionals[slot].1;
                let x_keys: std::collections::HashSet<&PadEntry> =
                    cond.keys().chain(sampled.keys()).collect();
                for x in x_keys {
                    let a = pe * cond.get(x).copied().unwrap_or(0.0);
                    let b = ps * sampled.get(x).copied().unwrap_or(0.0);
                    total += (a - b).abs();
                }
            }
        }
    }
    Ok(total / 2.0)
}

/// Output of [`general_u_enc`]: one `(d, y)` per key bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralPadString(pub Vec<PadEntry>);

/// Pad with an arbitrary unitary family indexed by `key_bits`-bit keys.
/// Each key bit comes from one pad step on a fresh `|0>` ancilla in the
/// Hadamard basis, which leaves the ancilla in `|k_j>`.
#[allow(clippy::too_many_arguments)]
pub fn general_u_enc<R, F>(
    pk: &TcfPublicKey,
    state: &StateVector,
    family: F,
    key_bits: usize,
    targets: &[usize],
    oracle: &mut PhaseOracle,
    rng: &mut R,
) -> Result<(StateVector, GeneralPadString, Vec<bool>)>
where
    R: Rng + ?Sized,
    F: Fn(&[bool]) -> CMatrix,
{
    let mut key = Vec::with_capacity(key_bits);
    let mut entries = Vec::with_capacity(key_bits);
    for _ in 0..key_bits {
        let (entry, ancilla) = pad_step(pk, &StateVector::qubits(1), 0, true, oracle, rng)?;
        let (digits, _) = ancilla.measure_registers(&[0], Basis::Standard, rng)?;
        key.push(digits[0] == 1);
        entries.push(entry);
    }
    let u = family(&key);
    let expected = state.subspace_dim(targets)?;
    if u.nrows() != expected {
        return Err(OpadError::FamilyDimension {
            expected,
            found: u.nrows(),
        });
    }
    Ok((state.apply_unitary(&u, targets)?, GeneralPadString(entries), key))
}

pub fn general_dec(
    sk: &TcfSecretKey,
    s: &GeneralPadString,
    oracle: &mut PhaseOracle,
) -> Result<Vec<bool>> {
    s.0.iter().map(|e| entry_bit(sk, e, oracle)).collect()
}

pub fn general_samp<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    key_bits: usize,
    rng: &mut R,
) -> Result<GeneralPadString> {
    (0..key_bits)
        .map(|_| samp_entry(pk, false, rng))
        .collect::<Result<_>>()
        .map(GeneralPadString)
}

/// The Pauli family on `qubits` qubits, keyed as `x` bits then `z` bits.
pub fn pauli_family(qubits: usize) -> impl Fn(&[bool]) -> CMatrix {
    move |k: &[bool]| {
        PauliKey::from_bits(k)
            .map(|key| key.matrix())
            .unwrap_or_else(|_| gates::identity(1 << qubits))
    }
}
