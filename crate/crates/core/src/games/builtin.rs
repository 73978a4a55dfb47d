//! Built-in games: magic square, KCBS and embedded two-player games.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::qsim::{gates, CMatrix, Observable, StateVector, C64};

use super::{ContextualityGame, QuantumStrategy, Result, Weight};

fn obs(m: CMatrix) -> Observable {
    Observable::new(m).expect("built-in observables are Hermitian")
}

fn tuples_with_product(len: usize, product: i64) -> BTreeSet<Vec<i64>> {
    (0..1u32 << len)
        .map(|mask| {
            (0..len)
                .map(|i| if mask >> (len - 1 - i) & 1 == 1 { -1 } else { 1 })
                .collect::<Vec<i64>>()
        })
        .filter(|t| t.iter().product::<i64>() == product)
        .collect()
}

/// The 3x3 magic square with the two-qubit operator solution on `|00>`.
///
/// Questions are the cells in row-major order; contexts are the three rows
/// then the three columns. Every context must multiply to +1 except the
/// third column, which must multiply to -1.
pub fn magic_square() -> (ContextualityGame, QuantumStrategy) {
    let questions: Vec<String> = (1..=3)
        .flat_map(|r| (1..=3).map(move |c| format!("r{r}c{c}")))
        .collect();
    let contexts = vec![
        vec![0, 1, 2],
        vec![3, 4, 5],
        vec![6, 7, 8],
        vec![0, 3, 6],
        vec![1, 4, 7],
        vec![2, 5, 8],
    ];
    let accept = (0..6)
        .map(|c| tuples_with_product(3, if c == 5 { -1 } else { 1 }))
        .collect();
    let game = ContextualityGame::uniform(questions, vec![-1, 1], contexts, accept)
        .expect("magic square is well formed");

    let (i, x, z) = (gates::identity(2), gates::pauli_x(), gates::pauli_z());
    let xz = &x * &z;
    let table = [
        (&i, &x),
        (&z, &i),
        (&z, &x),
        (&x, &i),
        (&i, &z),
        (&x, &z),
        (&x, &x),
        (&z, &z),
        (&xz, &xz),
    ];
    let observables = table
        .iter()
        .map(|(a, b)| obs(gates::kron(a, b)))
        .collect();
    let strategy = QuantumStrategy::new(StateVector::qubits(2), observables)
        .expect("magic square strategy dimensions agree");
    (game, strategy)
}

/// KCBS pentagon game with the optimal qutrit strategy on `|0>`.
///
/// Question `q` asks for the outcome of the rank-one projector onto
/// `cos t |0> + sin t sin(p_q) |1> + sin t cos(p_q) |2>` with
/// `p_q = 4 pi q / 5` and `cos^2 t = cos(pi/5) / (1 + cos(pi/5))`.
pub fn kcbs() -> (ContextualityGame, QuantumStrategy) {
    let questions: Vec<String> = (0..5).map(|q| format!("v{q}")).collect();
    let contexts: Vec<Vec<usize>> = (0..5).map(|q| vec![q, (q + 1) % 5]).collect();
    let accept_one: BTreeSet<Vec<i64>> = [vec![0, 1], vec![1, 0]].into_iter().collect();
    let game = ContextualityGame::uniform(questions, vec![0, 1], contexts, vec![accept_one; 5])
        .expect("KCBS is well formed");

    let cos_sq = (PI / 5.0).cos() / (1.0 + (PI / 5.0).cos());
    let (ct, st) = (cos_sq.sqrt(), (1.0 - cos_sq).sqrt());
    let observables = (0..5)
        .map(|q| {
            let phi = 4.0 * PI * q as f64 / 5.0;
            let v = [
                C64::new(ct, 0.0),
                C64::new(st * phi.sin(), 0.0),
                C64::new(st * phi.cos(), 0.0),
            ];
            obs(gates::outer(&v, &v))
        })
        .collect();
    let strategy = QuantumStrategy::new(StateVector::zero(&[3]).expect("qutrit"), observables)
        .expect("KCBS strategy dimensions agree");
    (game, strategy)
}

/// Two-player one-round game with product question sets.
#[derive(Debug, Clone)]
pub struct NonlocalGame {
    pub alice_questions: Vec<String>,
    pub bob_questions: Vec<String>,
    pub alice_answers: Vec<i64>,
    pub bob_answers: Vec<i64>,
    /// `distribution[x][y]`.
    pub distribution: Vec<Vec<Weight>>,
    /// `accept[x][y]` holds accepted `(a, b)` pairs.
    pub accept: Vec<Vec<BTreeSet<(i64, i64)>>>,
}

/// Embed a two-player game as a contextuality game: one question per
/// player question, one context `(Alice x, Bob y)` per pair in the support.
pub fn embed_nonlocal_game(g: &NonlocalGame) -> Result<ContextualityGame> {
    let na = g.alice_questions.len();
    let questions: Vec<String> = g
        .alice_questions
        .iter()
        .map(|x| format!("A:{x}"))
        .chain(g.bob_questions.iter().map(|y| format!("B:{y}")))
        .collect();
    let mut answers: Vec<i64> = g.alice_answers.iter().chain(&g.bob_answers).copied().collect();
    answers.sort_unstable();
    answers.dedup();
    let mut contexts = Vec::new();
    let mut weights = Vec::new();
    let mut accept = Vec::new();
    for (x, row) in g.distribution.iter().enumerate() {
        for (y, &w) in row.iter().enumerate() {
            if w == Weight::from_integer(0) {
                continue;
            }
            contexts.push(vec![x, na + y]);
            weights.push(w);
            accept.push(g.accept[x][y].iter().map(|&(a, b)| vec![a, b]).collect());
        }
    }
    ContextualityGame::new(questions, answers, contexts, weights, accept)
}

/// CHSH: bits in and out, win iff `a xor b = x and y`, uniform questions.
pub fn chsh_nonlocal() -> NonlocalGame {
    let bits = vec![0, 1];
    let accept = (0..2)
        .map(|x| {
            (0..2)
                .map(|y| {
                    let target = x & y;
                    [(0, 0), (0, 1), (1, 0), (1, 1)]
                        .into_iter()
                        .filter(|&(a, b)| (a ^ b) == target)
                        .collect()
                })
                .collect()
        })
        .collect();
    NonlocalGame {
        alice_questions: vec!["0".into(), "1".into()],
        bob_questions: vec!["0".into(), "1".into()],
        alice_answers: bits.clone(),
        bob_answers: bits,
        distribution: vec![vec![Weight::new(1, 4); 2]; 2],
        accept,
    }
}

/// Embedded CHSH with the optimal strategy on `(|00> + |11>)/sqrt 2`.
///
/// Each observable is the projector onto outcome 1 of a real-plane spin
/// measurement; Alice uses angles 0 and pi/2, Bob pi/4 and -pi/4.
pub fn chsh() -> (ContextualityGame, QuantumStrategy) {
    let game = embed_nonlocal_game(&chsh_nonlocal()).expect("CHSH embeds");
    let spin = |angle: f64| -> CMatrix {
        gates::pauli_z().scale(angle.cos()) + gates::pauli_x().scale(angle.sin())
    };
    let outcome_one = |m: CMatrix| -> CMatrix { (gates::identity(2) - m).scale(0.5) };
    let id = gates::identity(2);
    let observables = vec![
        obs(gates::kron(&outcome_one(spin(0.0)), &id)),
        obs(gates::kron(&outcome_one(spin(PI / 2.0)), &id)),
        obs(gates::kron(&id, &outcome_one(spin(PI / 4.0)))),
        obs(gates::kron(&id, &outcome_one(spin(-PI / 4.0)))),
    ];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = C64::new(0.0, 0.0);
    let bell = StateVector::new(
        vec![2, 2],
        vec![C64::new(h, 0.0), zero, zero, C64::new(h, 0.0)],
    )
    .expect("Bell state is normalized");
    let strategy = QuantumStrategy::new(bell, observables).expect("CHSH dimensions agree");
    (game, strategy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kcbs_neighbours_are_orthogonal() {
        let (_, s) = kcbs();
        for q in 0..5 {
            let a = s.observable(q).matrix();
            let b = s.observable((q + 1) % 5).matrix();
            assert!((a * b).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn kcbs_projectors_have_weight_one_over_sqrt5_on_zero() {
        let (_, s) = kcbs();
        for q in 0..5 {
            let p = s.observable(q).matrix()[(0, 0)].re;
            assert!((p - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn magic_square_operator_products() {
        let (g, s) = magic_square();
        for (c, ctx) in g.contexts().iter().enumerate() {
            let prod = ctx
                .iter()
                .fold(gates::identity(4), |acc, &q| acc * s.observable(q).matrix());
            let sign = if c == 5 { -1.0 } else { 1.0 };
            let expected = gates::identity(4).scale(sign);
            assert!(crate::qsim::max_abs_diff(&prod, &expected) < 1e-12, "context {c}");
        }
    }

    #[test]
    fn chsh_embedding_shape_and_values() {
        let (g, s) = chsh();
        assert_eq!(g.questions().len(), 4);
        assert_eq!(g.contexts().len(), 4);
        assert!(g.contexts().iter().all(|c| c.len() == 2));
        assert_eq!(g.nc_value().unwrap().value, Weight::new(3, 4));
        let expected = (PI / 8.0).cos().powi(2);
        assert!((s.value_in(&g).unwrap() - expected).abs() < 1e-9);
    }
}
