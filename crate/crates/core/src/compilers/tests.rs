use std::f64::consts::FRAC_PI_8;

use super::*;
use crate::games::{chsh, kcbs, magic_square, Assignment, QuantumStrategy};
use crate::mc::{rng_from_seed, trial_rng};
use crate::opad::OracleMode;
use crate::qsim::StateVector;

fn kcbs_qubits() -> (ContextualityGame, QuantumStrategy) {
    let (g, s) = kcbs();
    (g, s.embed_in_qubits(0).unwrap())
}

fn nc_table(g: &ContextualityGame) -> Assignment {
    g.nc_value().unwrap().table
}

fn config() -> CompilerConfig {
    CompilerConfig::default()
}

#[test]
fn kinds_parse_and_print() {
    for k in CompilerKind::ALL {
        assert_eq!(k.name().parse::<CompilerKind>().unwrap(), k);
        assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
    }
    assert!("2-2".parse::<CompilerKind>().is_err());
}

#[test]
fn one_one_needs_pairs() {
    let (ms, _) = magic_square();
    assert!(matches!(
        CompiledGame::new(&ms, CompilerKind::OneOne),
        Err(CompilerError::IncompatibleKind { .. })
    ));
    let (k, _) = kcbs();
    assert!(CompiledGame::new(&k, CompilerKind::OneOne).is_ok());
}

#[test]
fn round_one_sets_per_kind() {
    let (ms, _) = magic_square();
    let full = CompiledGame::new(&ms, CompilerKind::AllButNoneOne).unwrap();
    assert_eq!(full.sets().len(), 6);
    assert!(full.sets().iter().all(|s| s.positions == [0, 1, 2]));
    let skip = CompiledGame::new(&ms, CompilerKind::AllButOneOne).unwrap();
    assert_eq!(skip.sets().len(), 18);
    assert!(skip.sets().iter().all(|s| s.positions.len() == 2));
    let (k, _) = kcbs();
    let one = CompiledGame::new(&k, CompilerKind::OneOne).unwrap();
    assert_eq!(one.sets().len(), 10);
    assert_eq!(one.payload_bits(), 4);
}

#[test]
fn one_one_question_is_uniform_in_context() {
    let (g, _) = chsh();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let trials = 4_000;
    let firsts = (0..trials)
        .filter(|&t| {
            let mut rng = trial_rng(1, t);
            let (v, _) = verifier_new(&compiled, &config(), SessionOptions::default(), &mut rng).unwrap();
            compiled.sets()[v.round1_set()].positions == [0]
        })
        .count();
    assert!((firsts as f64 / trials as f64 - 0.5).abs() < 0.03);
}

#[test]
fn answers_encode_round_trip() {
    let (ms, _) = magic_square();
    let compiled = CompiledGame::new(&ms, CompilerKind::AllButNoneOne).unwrap();
    let answers = [1, -1, -1];
    let enc = compiled.encode_answers(&answers).unwrap();
    assert_eq!(compiled.decode_answers(&enc, 3).unwrap(), answers);
    assert!(compiled.encode_answers(&[0]).is_err());
    assert!(compiled.decode_answers(&enc, 2).is_err());
}

#[test]
fn messages_out_of_order_are_rejected() {
    let (g, s) = kcbs_qubits();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let prover = honest_quantum_prover(&compiled, &s).unwrap();
    let mut rng = rng_from_seed(2);
    let mut oracle = PhaseOracle::new(OracleMode::Hash, &mut rng);
    let (mut v, m1) = verifier_new(&compiled, &config(), SessionOptions::default(), &mut rng).unwrap();
    assert!(matches!(
        verifier_decide(&mut v, 0),
        Err(CompilerError::OutOfOrder { .. })
    ));
    let (m2, held) = prover.round1(&compiled, &m1, &mut oracle, &mut rng).unwrap();
    let m3 = verifier_message3(&mut v, &m2, &mut oracle, &mut rng).unwrap();
    assert!(verifier_message3(&mut v, &m2, &mut oracle, &mut rng).is_err());
    let a = prover.round2(&compiled, held, &m3, &mut rng).unwrap();
    verifier_decide(&mut v, a).unwrap();
    assert!(verifier_decide(&mut v, a).is_err());
    assert_eq!(v.stage(), Stage::Complete);
}

fn post_measurement(s: &QuantumStrategy, questions: &[usize], answers: &[i64]) -> StateVector {
    let targets = s.all_registers();
    questions.iter().zip(answers).fold(s.state().clone(), |st, (&q, &a)| {
        let p = s.observable(q).projector_for(a as f64).unwrap();
        st.project(p, &targets).unwrap().1.unwrap()
    })
}

// Before the round-2 measurement the prover holds U_k |psi_{q', a'}>.
#[test]
fn held_state_is_padded_post_measurement_state() {
    let cases = [
        (kcbs_qubits(), CompilerKind::OneOne),
        (magic_square(), CompilerKind::AllButNoneOne),
        (magic_square(), CompilerKind::AllButOneOne),
    ];
    for ((g, s), kind) in cases {
        let compiled = CompiledGame::new(&g, kind).unwrap();
        let prover = honest_quantum_prover(&compiled, &s).unwrap();
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let mut oracle = PhaseOracle::new(OracleMode::Hash, &mut rng);
            let (mut v, m1) =
                verifier_new(&compiled, &config(), SessionOptions::default(), &mut rng).unwrap();
            let (m2, held) = prover.round1(&compiled, &m1, &mut oracle, &mut rng).unwrap();
            let m3 = verifier_message3(&mut v, &m2, &mut oracle, &mut rng).unwrap();
            let (k1, k2) = v.key_parts().unwrap().clone();
            assert_eq!(m3.key, k1.compose(&k2).unwrap());
            assert!(g.context(v.context()).contains(&m3.question));
            let plain = post_measurement(
                &s,
                &compiled.set_questions(v.round1_set()),
                v.round1_answers().unwrap(),
            );
            let expected = plain.apply_pauli_pad(&m3.key, &s.all_registers()).unwrap();
            assert!(held.fidelity(&expected).unwrap() >= 1.0 - 1e-9, "{kind} seed {seed}");
        }
    }
}

#[test]
fn context_measurement_order_is_irrelevant() {
    let (g, s) = magic_square();
    for ctx in g.contexts() {
        let reversed: Vec<usize> = ctx.iter().rev().copied().collect();
        for tuple in g.accepted(0).iter().chain(g.accepted(3)) {
            let rev_tuple: Vec<i64> = tuple.iter().rev().copied().collect();
            let a = s.sequence_probability(s.state(), ctx, tuple).unwrap();
            let b = s.sequence_probability(s.state(), &reversed, &rev_tuple).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn rate<P: CompiledProver>(compiled: &CompiledGame, p: &P, trials: u64, seed: u64) -> RateEstimate {
    estimate_win_rate(compiled, p, &config(), SessionOptions::default(), trials, seed).unwrap()
}

use crate::mc::RateEstimate;

#[test]
fn one_one_kcbs_honest_and_truth_table() {
    let (g, s) = kcbs_qubits();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let honest = rate(&compiled, &honest_quantum_prover(&compiled, &s).unwrap(), 6_000, 3);
    let expected = completeness_bound(&compiled, 2.0 / 5f64.sqrt());
    assert!((expected - 0.5 * (1.0 + 2.0 / 5f64.sqrt())).abs() < 1e-12);
    assert!(honest.within(expected, 0.02), "{honest:?}");
    let tt = rate(&compiled, &truthtable_prover(&compiled, &nc_table(&g)).unwrap(), 6_000, 4);
    assert!(tt.within(0.9, 0.02), "{tt:?}");
    assert!((soundness_bound(&compiled).unwrap() - 0.9).abs() < 1e-12);
}

#[test]
fn one_one_chsh_honest() {
    let (g, s) = chsh();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let honest = rate(&compiled, &honest_quantum_prover(&compiled, &s).unwrap(), 6_000, 5);
    let expected = 0.5 * (1.0 + FRAC_PI_8.cos().powi(2));
    assert!(honest.within(expected, 0.02), "{honest:?}");
}

#[test]
fn all_but_none_magic_square_honest_is_perfect() {
    let (g, s) = magic_square();
    let compiled = CompiledGame::new(&g, CompilerKind::AllButNoneOne).unwrap();
    let honest = rate(&compiled, &honest_quantum_prover(&compiled, &s).unwrap(), 2_000, 6);
    assert_eq!(honest.rate, 1.0);
}

#[test]
fn all_but_none_feasible_prover_rates() {
    let (g, _) = kcbs();
    let compiled = CompiledGame::new(&g, CompilerKind::AllButNoneOne).unwrap();
    let tau = nc_table(&g);
    let r = rate(&compiled, &feasible_inconsistent_prover(&compiled, &tau).unwrap(), 10_000, 7);
    assert!(r.within(0.9, 0.02), "{r:?}");
    assert!(r.rate > 2.0 / 5f64.sqrt());
    assert!((soundness_bound(&compiled).unwrap() - 0.9).abs() < 1e-12);

    let (ms, _) = magic_square();
    let compiled = CompiledGame::new(&ms, CompilerKind::AllButNoneOne).unwrap();
    let r = rate(
        &compiled,
        &feasible_inconsistent_prover(&compiled, &nc_table(&ms)).unwrap(),
        6_000,
        8,
    );
    assert!(r.rate <= 1.0 - 1.0 / 18.0 + 0.02, "{r:?}");
}

// The feasible prover loses exactly when q lands on a position where its
// round-1 tuple departs from its table.
#[test]
fn feasible_prover_mismatch_rate_is_predicted() {
    let (ms, _) = magic_square();
    let compiled = CompiledGame::new(&ms, CompilerKind::AllButNoneOne).unwrap();
    let tau = nc_table(&ms);
    let tuples = ms.closest_feasible(&tau).unwrap();
    let mismatch: f64 = ms
        .contexts()
        .iter()
        .enumerate()
        .map(|(c, ctx)| {
            let w = ms.weights()[c];
            let differing = tuples[c]
                .iter()
                .zip(tau.restrict(ctx))
                .filter(|(a, b)| *a != b)
                .count();
            (*w.numer() as f64 / *w.denom() as f64) * differing as f64 / ctx.len() as f64
        })
        .sum();
    assert!((mismatch - 1.0 / 18.0).abs() < 1e-12);
    let r = rate(&compiled, &feasible_inconsistent_prover(&compiled, &tau).unwrap(), 10_000, 9);
    assert!(r.within(1.0 - mismatch, 0.015), "{r:?}");
}

#[test]
fn all_but_one_magic_square_rates() {
    let (g, s) = magic_square();
    let compiled = CompiledGame::new(&g, CompilerKind::AllButOneOne).unwrap();
    let honest = rate(&compiled, &honest_quantum_prover(&compiled, &s).unwrap(), 2_000, 10);
    assert_eq!(honest.rate, 1.0);
    assert_eq!(completeness_bound(&compiled, 1.0), 1.0);
    let tt = rate(&compiled, &truthtable_prover(&compiled, &nc_table(&g)).unwrap(), 10_000, 11);
    assert!(tt.within(17.0 / 18.0, 0.015), "{tt:?}");
    assert!((soundness_bound(&compiled).unwrap() - 17.0 / 18.0).abs() < 1e-12);
}

#[test]
fn faithfulness_holds_and_negative_control_fails() {
    let (k, _) = kcbs();
    let (ms, _) = magic_square();
    let cases = [
        (k.clone(), CompilerKind::OneOne),
        (k, CompilerKind::AllButNoneOne),
        (ms.clone(), CompilerKind::AllButNoneOne),
        (ms, CompilerKind::AllButOneOne),
    ];
    for (g, kind) in cases {
        let compiled = CompiledGame::new(&g, kind).unwrap();
        let optimal = nc_table(&g);
        for tau in [optimal.clone(), Assignment(vec![g.answers()[0]; g.questions().len()])] {
            let ok = decision_faithfulness_check(&compiled, &tau, &config(), DecisionRule::Faithful, 300, 12)
                .unwrap();
            assert!(ok.passed(), "{kind}: {ok:?}");
            assert!(ok.covered > 0);
            // The control can only be caught on a table that wins somewhere.
            if tau != optimal {
                continue;
            }
            let bad = decision_faithfulness_check(
                &compiled,
                &tau,
                &config(),
                DecisionRule::RejectOnConsistency,
                300,
                12,
            )
            .unwrap();
            assert!(!bad.passed(), "{kind}");
        }
    }
}

#[test]
fn truth_table_ignores_the_key() {
    let (g, _) = kcbs();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let p = truthtable_prover(&compiled, &nc_table(&g)).unwrap();
    let run = |uniform_k| {
        run_transcripts(
            &compiled,
            &p,
            &config(),
            SessionOptions {
                rule: DecisionRule::Faithful,
                uniform_k,
            },
            500,
            13,
        )
        .unwrap()
        .iter()
        .map(|t| t.accept)
        .collect::<Vec<_>>()
    };
    assert_eq!(run(false), run(true));
}

#[test]
fn transcripts_replay_and_recompute() {
    let (g, s) = kcbs_qubits();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let prover = honest_quantum_prover(&compiled, &s).unwrap();
    let cfg = config();
    let all = run_transcripts(&compiled, &prover, &cfg, SessionOptions::default(), 10, 14).unwrap();
    for tr in &all {
        let mut rng = rng_from_seed(tr.seed);
        let (again, v) =
            run_session(&compiled, &prover, &cfg, SessionOptions::default(), tr.seed, &mut rng).unwrap();
        assert_eq!(&again, tr);
        assert_eq!(
            tr.recompute(&compiled, v.qfhe_secret(), DecisionRule::Faithful).unwrap(),
            tr.accept
        );
    }
    let json = serde_json::to_value(&all[0]).unwrap();
    for (i, role) in TRANSCRIPT_ROLES.iter().enumerate() {
        assert!(json.get(format!("t{}_{role}", i + 1)).is_some(), "{role}");
    }
    let back: CompiledTranscript = serde_json::from_value(json).unwrap();
    assert_eq!(back, all[0]);
}

#[test]
fn mismatched_pad_lengths_are_malformed() {
    let (g, _) = kcbs();
    let compiled = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let p = truthtable_prover(&compiled, &nc_table(&g)).unwrap();
    let mut rng = rng_from_seed(15);
    let mut oracle = PhaseOracle::new(OracleMode::Hash, &mut rng);
    let (mut v, m1) = verifier_new(&compiled, &config(), SessionOptions::default(), &mut rng).unwrap();
    let (mut m2, _) = p.round1(&compiled, &m1, &mut oracle, &mut rng).unwrap();
    m2.pad_string.0.pop();
    assert!(matches!(
        verifier_message3(&mut v, &m2, &mut oracle, &mut rng),
        Err(CompilerError::Malformed(_))
    ));
}

#[cfg(feature = "lwe")]
#[test]
fn lwe_backends_run_end_to_end() {
    let (g, s) = magic_square();
    let compiled = CompiledGame::new(&g, CompilerKind::AllButNoneOne).unwrap();
    let cfg = CompilerConfig {
        lambda: 5,
        tcf: crate::tcf::TcfBackend::Lwe,
        fhe: crate::qfhe::FheBackend::Lwe,
        oracle: OracleMode::Lazy,
    };
    let p = honest_quantum_prover(&compiled, &s).unwrap();
    let r = estimate_win_rate(&compiled, &p, &cfg, SessionOptions::default(), 200, 16).unwrap();
    assert_eq!(r.rate, 1.0);
}
