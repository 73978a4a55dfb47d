//! Coherent range sampling.
//!
//! [`coherent_samp`] builds the full superposition
//! `sum_{b,x,y} a_b sqrt(f_b(x)(y) / |X|) |b>|x>|y>` on explicit registers.
//! [`samp_measure`] fuses that step with a measurement of the image
//! register: it samples `y` from its exact marginal and returns the
//! collapsed state without ever allocating the image register.

use rand::Rng;

use crate::qsim::{sample_index, StateVector, C64};

use super::{Image, Result, TcfError, TcfPublicKey};

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Dense coherent sampling with `control` selecting the branch.
///
/// `x_regs` must be `n` qubits and `y_regs` must jointly have dimension
/// [`TcfPublicKey::image_alphabet_size`]; both must start in `|0>`.
pub fn coherent_samp(
    pk: &TcfPublicKey,
    state: &StateVector,
    control: usize,
    x_regs: &[usize],
    y_regs: &[usize],
) -> Result<StateVector> {
    let dims = state.dims();
    let n = pk.domain_bits();
    let all: Vec<usize> = std::iter::once(control)
        .chain(x_regs.iter().copied())
        .chain(y_regs.iter().copied())
        .collect();
    if all.iter().any(|&r| r >= dims.len()) {
        return Err(TcfError::Registers("register index out of range".into()));
    }
    if dims[control] != 2 || x_regs.len() != n || x_regs.iter().any(|&r| dims[r] != 2) {
        return Err(TcfError::Registers(format!(
            "need a control qubit and {n} preimage qubits"
        )));
    }
    let y_dim: usize = y_regs.iter().map(|&r| dims[r]).product();
    if y_dim != pk.image_alphabet_size() {
        return Err(TcfError::Registers(format!(
            "image registers have dimension {y_dim}, need {}",
            pk.image_alphabet_size()
        )));
    }
    let st = strides(dims);
    let scale = 1.0 / (pk.domain_size() as f64).sqrt();
    let x_offset = |x: u64| -> usize {
        x_regs
            .iter()
            .enumerate()
            .map(|(i, &r)| usize::from((x >> (n - 1 - i)) & 1 == 1) * st[r])
            .sum()
    };
    let y_offset = |mut idx: usize| -> usize {
        let mut off = 0;
        for &r in y_regs.iter().rev() {
            off += (idx % dims[r]) * st[r];
            idx /= dims[r];
        }
        off
    };
    let mut out = vec![C64::new(0.0, 0.0); state.amps().len()];
    for (i, &amp) in state.amps().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let occupied = x_regs
            .iter()
            .chain(y_regs)
            .any(|&r| !(i / st[r]).is_multiple_of(dims[r]));
        if occupied {
            return Err(TcfError::Registers(
                "preimage and image registers must start in |0>".into(),
            ));
        }
        let b = (i / st[control]) % 2 == 1;
        for x in 0..pk.domain_size() {
            for (y, p) in pk.support(b, x)? {
                let j = i + x_offset(x) + y_offset(pk.image_index(&y));
                out[j] += amp * (p.sqrt() * scale);
            }
        }
    }
    Ok(StateVector::normalized(dims.to_vec(), out)?)
}

/// Coherent sampling controlled by `control`, followed by measuring the
/// image. Returns `y` and the state with an `n`-qubit preimage register
/// appended after the existing registers.
pub fn samp_measure<R: Rng + ?Sized>(
    pk: &TcfPublicKey,
    state: &StateVector,
    control: usize,
    rng: &mut R,
) -> Result<(Image, StateVector)> {
    let dims = state.dims();
    if control >= dims.len() || dims[control] != 2 {
        return Err(TcfError::Registers("control must be a qubit".into()));
    }
    let stride: usize = dims[control + 1..].iter().product();
    let branch = |i: usize| (i / stride) % 2 == 1;

    let mut weights = [0.0f64; 2];
    for (i, a) in state.amps().iter().enumerate() {
        weights[usize::from(branch(i))] += a.norm_sqr();
    }
    // y ~ sum_b w_b E_x f_b(x): draw b, then x, then y.
    let b = sample_index(&weights, rng) == 1;
    let x = rng.random_range(0..pk.domain_size());
    let (y, _) = pk.eval(b, x, rng)?;

    let n = pk.domain_bits();
    let width = 1usize << n;
    let pre = pk.preimages(&y);
    let mut out = vec![C64::new(0.0, 0.0); state.amps().len() * width];
    for (i, &amp) in state.amps().iter().enumerate() {
        let bi = branch(i);
        for &(pb, px, p) in &pre {
            if pb == bi {
                out[i * width + px as usize] += amp * p.sqrt();
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims.extend(std::iter::repeat_n(2, n));
    Ok((y, StateVector::normalized(new_dims, out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::rng_from_seed;
    use crate::tcf::{gen, TcfBackend};
    use std::collections::HashMap;

    fn plus() -> StateVector {
        StateVector::qubit(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn plus_control_leaves_claw_superposition() {
        let mut rng = rng_from_seed(1);
        let kp = gen(6, None, TcfBackend::Ideal, &mut rng).unwrap();
        for _ in 0..50 {
            let (y, s) = samp_measure(&kp.pk, &plus(), 0, &mut rng).unwrap();
            let (x0, x1) = kp.sk.claw(&y).unwrap();
            let mut amps = vec![C64::new(0.0, 0.0); 2 * 64];
            amps[x0 as usize] = C64::new(1.0, 0.0);
            amps[64 + x1 as usize] = C64::new(1.0, 0.0);
            let expected = StateVector::normalized(s.dims().to_vec(), amps).unwrap();
            assert!(s.equal_up_to_global_phase(&expected, 1e-12).unwrap());
        }
    }

    #[test]
    fn zero_control_leaves_single_preimage() {
        let mut rng = rng_from_seed(2);
        let kp = gen(6, None, TcfBackend::Ideal, &mut rng).unwrap();
        let (y, s) = samp_measure(&kp.pk, &StateVector::qubits(1), 0, &mut rng).unwrap();
        let x0 = kp.sk.inv(false, &y).unwrap();
        let mut digits = vec![0usize];
        digits.extend(crate::bits::to_vec(x0, 6).into_iter().map(usize::from));
        let expected = StateVector::basis(s.dims(), &digits).unwrap();
        assert!(s.equal_up_to_global_phase(&expected, 1e-12).unwrap());
    }

    #[test]
    fn same_seed_same_image() {
        let kp = gen(6, None, TcfBackend::Ideal, &mut rng_from_seed(3)).unwrap();
        let a = samp_measure(&kp.pk, &plus(), 0, &mut rng_from_seed(4)).unwrap().0;
        let b = samp_measure(&kp.pk, &plus(), 0, &mut rng_from_seed(4)).unwrap().0;
        assert_eq!(a, b);
    }

    // The fused operation must agree with building the dense superposition
    // and then measuring the image register.
    #[test]
    fn fused_matches_dense_image_marginal() {
        let mut rng = rng_from_seed(5);
        let kp = gen(3, None, TcfBackend::Ideal, &mut rng).unwrap();
        let psi = StateVector::qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let start = psi.tensor(&StateVector::qubits(3 + 5));
        let x_regs: Vec<usize> = (1..4).collect();
        let y_regs: Vec<usize> = (4..9).collect();
        let dense = coherent_samp(&kp.pk, &start, 0, &x_regs, &y_regs).unwrap();
        let marginal = dense.register_probabilities(&y_regs).unwrap();
        for (yi, &p) in marginal.iter().enumerate() {
            let y = Image::scalar(yi as u64);
            let in_image = !kp.pk.preimages(&y).is_empty();
            let expected = if in_image { 1.0 / 8.0 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12);
            if in_image {
                let digits: Vec<usize> = crate::bits::to_vec(yi as u64, 5)
                    .into_iter()
                    .map(usize::from)
                    .collect();
                let dense_post = dense.discard_known(&y_regs, &digits).unwrap();
                let pre = kp.pk.preimages(&y);
                let mut amps = vec![C64::new(0.0, 0.0); 16];
                for (b, x, _) in pre {
                    let a = psi.amps()[usize::from(b)];
                    amps[usize::from(b) * 8 + x as usize] = a;
                }
                let fused = StateVector::normalized(vec![2; 4], amps).unwrap();
                assert!(dense_post.equal_up_to_global_phase(&fused, 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn fused_image_is_uniform_over_image() {
        let mut rng = rng_from_seed(6);
        let kp = gen(4, None, TcfBackend::Ideal, &mut rng).unwrap();
        let mut counts: HashMap<Image, usize> = HashMap::new();
        let trials = 16_000;
        for _ in 0..trials {
            let (y, _) = samp_measure(&kp.pk, &plus(), 0, &mut rng).unwrap();
            *counts.entry(y).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let expected = trials as f64 / 16.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 15 degrees of freedom; p = 0.001 at 37.7
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn dense_rejects_bad_layout() {
        let kp = gen(3, None, TcfBackend::Ideal, &mut rng_from_seed(7)).unwrap();
        let s = StateVector::qubits(6);
        assert!(coherent_samp(&kp.pk, &s, 0, &[1, 2, 3], &[4, 5]).is_err());
        let occupied = StateVector::qubits(9)
            .apply_unitary(&crate::qsim::gates::pauli_x(), &[2])
            .unwrap();
        assert!(coherent_samp(&kp.pk, &occupied, 0, &[1, 2, 3], &[4, 5, 6, 7, 8]).is_err());
    }
}
