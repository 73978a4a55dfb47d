//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use ctxlab::bits;
use ctxlab::games::{chsh, kcbs, magic_square};
use ctxlab::mc::rng_from_seed;
use ctxlab::qsim::{gates, CMatrix, Observable, PauliKey, StateVector, C64};
use ctxlab::tcf::{self, TcfBackend};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type PropResult = Result<(), TestCaseError>;

/// Normalized state on `qubits` qubits from raw amplitude pairs.
pub fn state_from(qubits: usize, raw: &[(f64, f64)]) -> StateVector {
    let amps: Vec<C64> = raw[..1 << qubits].iter().map(|&(re, im)| C64::new(re, im)).collect();
    StateVector::normalized(vec![2; qubits], amps).expect("nonzero amplitudes")
}

/// Amplitudes bounded away from the zero vector.
pub fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..1.0, -1.0f64..1.0), 8)
}

#[derive(Debug, Clone, Copy)]
pub enum Gate {
    H(usize),
    S(usize),
    T(usize),
    Ry(usize, f64),
    Cnot(usize, usize),
}

pub fn gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..3usize).prop_map(Gate::H),
        (0..3usize).prop_map(Gate::S),
        (0..3usize).prop_map(Gate::T),
        (0..3usize, -3.2f64..3.2).prop_map(|(q, t)| Gate::Ry(q, t)),
        (0..3usize, 1..3usize).prop_map(|(a, d)| Gate::Cnot(a, (a + d) % 3)),
    ]
}

fn matrix_of(g: Gate) -> (CMatrix, Vec<usize>) {
    match g {
        Gate::H(q) => (gates::hadamard(), vec![q]),
        Gate::S(q) => (gates::phase_s(), vec![q]),
        Gate::T(q) => (gates::phase_t(), vec![q]),
        Gate::Ry(q, t) => (gates::rotation_y(t), vec![q]),
        Gate::Cnot(a, b) => (gates::cnot(), vec![a, b]),
    }
}

/// Unitary circuits and projective measurements keep states normalized.
pub fn norm_is_preserved(raw: &[(f64, f64)], circuit: &[Gate], seed: u64) -> PropResult {
    let mut psi = state_from(3, raw);
    for &g in circuit {
        let (u, targets) = matrix_of(g);
        psi = psi.apply_unitary(&u, &targets).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
    let z = Observable::new(gates::pauli_z()).unwrap();
    let mut rng = rng_from_seed(seed);
    let (value, post) = psi.measure_observable(&z, &[1], &mut rng).unwrap();
    prop_assert!(value == 1.0 || value == -1.0);
    prop_assert!((post.norm() - 1.0).abs() < 1e-10);
    let total: f64 = psi.register_probabilities(&[0, 2]).unwrap().iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-10);
    Ok(())
}

/// Observables within each context of every bundled strategy commute, and
/// conjugation by a unitary preserves commutation.
pub fn contexts_commute(circuit: &[Gate]) -> PropResult {
    for (game, strategy) in [magic_square(), kcbs(), chsh()] {
        for ctx in game.contexts() {
            for &a in ctx {
                for &b in ctx {
                    let (oa, ob) = (strategy.observable(a), strategy.observable(b));
                    prop_assert!(oa.commutator_norm(ob) < 1e-9);
                }
            }
        }
    }
    let (game, strategy) = magic_square();
    let mut u = gates::identity(4);
    for &g in circuit.iter().filter(|g| matches!(g, Gate::H(q) | Gate::S(q) | Gate::T(q) | Gate::Ry(q, _) if *q < 2)) {
        let (m, t) = matrix_of(g);
        let full = if t[0] == 0 { gates::kron(&m, &gates::identity(2)) } else { gates::kron(&gates::identity(2), &m) };
        u = full * u;
    }
    for ctx in game.contexts() {
        let a = strategy.observable(ctx[0]).conjugated(&u);
        let b = strategy.observable(ctx[1]).conjugated(&u);
        prop_assert!(a.commutator_norm(&b) < 1e-9);
    }
    Ok(())
}

/// Padding by `k1` then `k2` equals padding by `k1 xor k2` up to phase.
pub fn pauli_keys_compose(raw: &[(f64, f64)], k1: &[bool], k2: &[bool]) -> PropResult {
    let psi = state_from(3, raw);
    let (k1, k2) = (PauliKey::from_bits(k1).unwrap(), PauliKey::from_bits(k2).unwrap());
    let all = [0, 1, 2];
    let twice = psi.apply_pauli_pad(&k1, &all).unwrap().apply_pauli_pad(&k2, &all).unwrap();
    let once = psi.apply_pauli_pad(&k1.compose(&k2).unwrap(), &all).unwrap();
    prop_assert!(twice.equal_up_to_global_phase(&once, 1e-10).unwrap());
    let id = k1.compose(&k1).unwrap();
    prop_assert_eq!(id, PauliKey::identity(3));
    Ok(())
}

/// Every `(b, x)` of an `n = 8` key evaluates, checks, inverts and lands in
/// a claw whose leading bits differ by the hidden bit.
pub fn tcf_round_trips(backend: TcfBackend, s: bool, seed: u64) -> PropResult {
    let mut rng = rng_from_seed(seed);
    let kp = tcf::gen(8, Some(s), backend, &mut rng).unwrap();
    let n = kp.pk.domain_bits();
    prop_assert_eq!(n, 8);
    for b in [false, true] {
        for x in 0..kp.pk.domain_size() {
            let support = kp.pk.support(b, x).unwrap();
            let mass: f64 = support.iter().map(|(_, p)| p).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            for (y, _) in &support {
                prop_assert!(kp.pk.chk(b, x, y));
                prop_assert_eq!(kp.sk.inv(b, y).unwrap(), x);
                let (x0, x1) = kp.sk.claw(y).unwrap();
                prop_assert_eq!(if b { x1 } else { x0 }, x);
                prop_assert_eq!(bits::first(x0, n) ^ bits::first(x1, n), s);
            }
        }
    }
    Ok(())
}

pub fn key_bits() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 6)
}
