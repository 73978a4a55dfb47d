//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::FRAC_PI_8;
use std::process::ExitCode;
use std::time::Instant;

use ctxlab::compilers::{
    decision_faithfulness_check, estimate_win_rate, feasible_inconsistent_prover, honest_quantum_prover,
    truthtable_prover, CompiledGame, CompilerConfig, CompilerKind, DecisionRule, SessionOptions,
};
use ctxlab::games::{chsh, kcbs, magic_square, Assignment, ContextualityGame, QuantumStrategy, Weight};
use ctxlab::mc::{rng_from_seed, RateEstimate};
use ctxlab::opad::{self, OracleMode, PhaseOracle};
use ctxlab::poq::{self, analytic_win_rate, rewind_game, ClassicalProver, ClassicalStrategy, HonestQuantumProver, TrapdoorCheater};
use ctxlab::reductions::{a2_reduction, l1_distance, QuestionDependentProver};
use ctxlab::tcf::TcfBackend;
use proptest::prelude::*;
use rand::Rng;
use proptest::test_runner::{Config, TestRunner};

const TRIALS: u64 = 20_000;
const TOL: f64 = 0.011;
const LAMBDA: usize = 8;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn kcbs_qubits() -> (ContextualityGame, QuantumStrategy) {
    let (g, s) = kcbs();
    (g, s.embed_in_qubits(0).expect("kcbs embeds"))
}

fn optimal_table(g: &ContextualityGame) -> Assignment {
    g.nc_value().expect("small game").table
}

fn rate_str(r: &RateEstimate) -> String {
    format!("{:.4}±{:.4}", r.rate, r.stderr)
}

fn c1_game_values() -> Outcome {
    let (ms, ms_s) = magic_square();
    let (k, k_s) = kcbs();
    let nc_ms = ms.nc_value().unwrap().value;
    let nc_k = k.nc_value().unwrap().value;
    let qu_ms = ms_s.value_in(&ms).unwrap();
    let qu_k = k_s.value_in(&k).unwrap();
    let ok = nc_ms == Weight::new(5, 6)
        && nc_k == Weight::new(4, 5)
        && (qu_ms - 1.0).abs() < 1e-9
        && (qu_k - 2.0 / 5f64.sqrt()).abs() < 1e-9;
    (ok, format!("nc(magic square)={nc_ms} nc(kcbs)={nc_k} qu(magic square)={qu_ms:.12} qu(kcbs)={qu_k:.12}"))
}

fn c2_poq_correctness() -> Outcome {
    let r = poq::run_protocol(&HonestQuantumProver, LAMBDA, TcfBackend::Ideal, TRIALS, 2).unwrap();
    let target = FRAC_PI_8.cos().powi(2);
    (r.within(target, TOL), format!("honest {} target {target:.4}", rate_str(&r)))
}

fn rewind_check<P: ClassicalProver>(name: &str, p: &P, seed: u64, notes: &mut Vec<String>) -> bool {
    let win = poq::run_protocol(p, LAMBDA, TcfBackend::Ideal, TRIALS, seed).unwrap();
    let guess = rewind_game(p, LAMBDA, TcfBackend::Ideal, TRIALS, seed + 1).unwrap();
    let bound = 2.0 * win.rate - 1.0 - 0.03;
    notes.push(format!("{name}: win {:.4} guess {:.4} >= {bound:.4}", win.rate, guess.rate));
    guess.rate >= bound
}

fn c3_poq_soundness() -> Outcome {
    let mut ok = true;
    let mut notes = vec![];
    for (i, s) in ClassicalStrategy::ZOO.into_iter().enumerate() {
        let a = analytic_win_rate(&s, LAMBDA, TcfBackend::Ideal, 500, 30 + i as u64).unwrap();
        ok &= a.max <= 0.75 + 1e-12;
        notes.push(format!("{} analytic max {:.4}", s.name(), a.max));
        ok &= rewind_check(s.name(), &s, 40 + 2 * i as u64, &mut notes);
    }
    ok &= rewind_check("trapdoor(0.1)", &TrapdoorCheater::with_advantage(0.1), 50, &mut notes);
    (ok, notes.join("; "))
}

fn c4_opad_correctness() -> Outcome {
    let mut worst: f64 = 1.0;
    for j in 1..=3usize {
        for seed in 0..100 {
            let mut rng = rng_from_seed(1_000 * j as u64 + seed);
            let kp = opad::gen(LAMBDA, TcfBackend::Ideal, &mut rng).unwrap();
            let mut oracle = PhaseOracle::new(OracleMode::Hash, &mut rng);
            let raw: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(0.1..1.0), rng.random_range(-1.0..1.0))).collect();
            let psi = common::state_from(j, &raw);
            let targets: Vec<usize> = (0..j).collect();
            let (out, s) = opad::enc(&kp.pk, &psi, &targets, &mut oracle, &mut rng).unwrap();
            let k = opad::dec(&kp.sk, &s, &mut oracle).unwrap();
            let expected = psi.apply_pauli_pad(&k, &targets).unwrap();
            worst = worst.min(out.fidelity(&expected).unwrap());
        }
    }
    (worst >= 1.0 - 1e-10, format!("300 round trips, min fidelity 1-{:.1e}", 1.0 - worst))
}

fn c5_opad_range_sampling() -> Outcome {
    let mut rng = rng_from_seed(5);
    let kp = opad::gen(6, TcfBackend::Ideal, &mut rng).unwrap();
    let mut oracle = PhaseOracle::new(OracleMode::Hash, &mut rng);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let raw: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(0.1..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi = common::state_from(1, &raw);
        worst = worst.max(opad::enc_samp_distance(&kp.pk, &psi, &mut oracle, false).unwrap());
    }
    let n = kp.pk.domain_bits();
    (n == 6 && worst < 1e-12, format!("n={n}, max total variation {worst:.1e}"))
}

fn rate<P: ctxlab::compilers::CompiledProver>(c: &CompiledGame, p: &P, seed: u64) -> RateEstimate {
    estimate_win_rate(c, p, &CompilerConfig::default(), SessionOptions::default(), TRIALS, seed).unwrap()
}

fn c6_one_one_kcbs() -> Outcome {
    let (g, s) = kcbs_qubits();
    let c = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    let honest = rate(&c, &honest_quantum_prover(&c, &s).unwrap(), 6);
    let tt = rate(&c, &truthtable_prover(&c, &optimal_table(&g)).unwrap(), 7);
    let target = 0.5 * (1.0 + 2.0 / 5f64.sqrt());
    let gap = honest.rate - tt.rate;
    let ok = honest.within(target, TOL) && tt.within(0.9, TOL) && gap >= 0.03;
    (ok, format!("honest {} target {target:.4}; truth table {} target 0.9; gap {gap:.4}", rate_str(&honest), rate_str(&tt)))
}

fn c7_all_but_none() -> Outcome {
    let (ms, ms_s) = magic_square();
    let c = CompiledGame::new(&ms, CompilerKind::AllButNoneOne).unwrap();
    let honest = rate(&c, &honest_quantum_prover(&c, &ms_s).unwrap(), 8);
    let (k, _) = kcbs();
    let ck = CompiledGame::new(&k, CompilerKind::AllButNoneOne).unwrap();
    let feasible = rate(&ck, &feasible_inconsistent_prover(&ck, &optimal_table(&k)).unwrap(), 9);
    let qu = 2.0 / 5f64.sqrt();
    let ok = honest.rate == 1.0 && feasible.within(0.9, TOL) && feasible.rate > qu;
    (ok, format!("magic square honest {}; kcbs feasible {} vs quantum {qu:.4}", rate_str(&honest), rate_str(&feasible)))
}

fn c8_all_but_one() -> Outcome {
    let (ms, ms_s) = magic_square();
    let c = CompiledGame::new(&ms, CompilerKind::AllButOneOne).unwrap();
    let honest = rate(&c, &honest_quantum_prover(&c, &ms_s).unwrap(), 10);
    let tt = rate(&c, &truthtable_prover(&c, &optimal_table(&ms)).unwrap(), 11);
    let ok = honest.rate == 1.0 && tt.within(17.0 / 18.0, TOL);
    (ok, format!("honest {}; truth table {} target {:.4}", rate_str(&honest), rate_str(&tt), 17.0 / 18.0))
}

fn c9_reduction_identity() -> Outcome {
    let (k, _) = kcbs();
    let c = CompiledGame::new(&k, CompilerKind::OneOne).unwrap();
    let n = c.sets().len();
    let (a, b, d) = (
        Assignment(vec![1, 0, 1, 0, 0]),
        Assignment(vec![0, 1, 0, 1, 0]),
        Assignment(vec![0, 0, 1, 0, 1]),
    );
    let split: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.7 } else { 0.3 }).collect();
    let three: Vec<Vec<(Assignment, f64)>> = (0..n)
        .map(|i| {
            let w = if i == 0 { [0.5, 0.3, 0.2] } else { [0.2, 0.3, 0.5] };
            vec![(a.clone(), w[0]), (b.clone(), w[1]), (d.clone(), w[2])]
        })
        .collect();
    let provers = [
        ("leaking", QuestionDependentProver::leaking(&c).unwrap()),
        ("two-table", QuestionDependentProver::two_tables(&c, &a, &b, &split).unwrap()),
        ("three-table", QuestionDependentProver::new(&c, three).unwrap()),
    ];
    let mut ok = true;
    let mut notes = vec![];
    for (i, (name, p)) in provers.iter().enumerate() {
        let report = a2_reduction(p, &c, &CompilerConfig::default(), 1_000, 10_000, 90 + i as u64).unwrap();
        let l1 = l1_distance(&p.distribution(report.plan.input0), &p.distribution(report.plan.input1));
        let target = 0.5 + 0.25 * l1;
        ok &= report.rate.within(target, 0.015);
        notes.push(format!("{name}: {} target {target:.4}", rate_str(&report.rate)));
    }
    (ok, notes.join("; "))
}

fn c10_faithfulness() -> Outcome {
    let mut ok = true;
    let mut pairs = 0;
    for (g, _) in [magic_square(), kcbs(), chsh()] {
        let tau = optimal_table(&g);
        for kind in CompilerKind::ALL {
            let Ok(c) = CompiledGame::new(&g, kind) else { continue };
            pairs += 1;
            let cfg = CompilerConfig::default();
            let good = decision_faithfulness_check(&c, &tau, &cfg, DecisionRule::Faithful, 1_000, 100).unwrap();
            let bad = decision_faithfulness_check(&c, &tau, &cfg, DecisionRule::RejectOnConsistency, 1_000, 100).unwrap();
            ok &= good.passed() && !bad.passed();
        }
    }
    (ok && pairs == 8, format!("{pairs} (game, kind) pairs, negative control caught on each"))
}

fn c11_properties() -> Outcome {
    let mut failures = vec![];
    let mut runner = TestRunner::new(Config::with_cases(64));
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };
    let r = runner.run(
        &(common::amplitudes(), prop::collection::vec(common::gate(), 0..12), any::<u64>()),
        |(raw, circuit, seed)| common::norm_is_preserved(&raw, &circuit, seed),
    );
    check("norm", r.map_err(|e| e.to_string()));
    let r = runner.run(&prop::collection::vec(common::gate(), 0..8), |c| common::contexts_commute(&c));
    check("commutation", r.map_err(|e| e.to_string()));
    let r = runner.run(
        &(common::amplitudes(), common::key_bits(), common::key_bits()),
        |(raw, k1, k2)| common::pauli_keys_compose(&raw, &k1, &k2),
    );
    check("pauli xor", r.map_err(|e| e.to_string()));
    let mut tcf_runner = TestRunner::new(Config::with_cases(6));
    let r = tcf_runner.run(&(any::<bool>(), any::<u64>()), |(s, seed)| {
        common::tcf_round_trips(TcfBackend::Ideal, s, seed)
    });
    check("tcf n=8", r.map_err(|e| e.to_string()));
    if cfg!(feature = "lwe") {
        let r = tcf_runner.run(&(any::<bool>(), any::<u64>()), |(s, seed)| {
            common::tcf_round_trips(TcfBackend::Lwe, s, seed)
        });
        check("lwe tcf n=8", r.map_err(|e| e.to_string()));
    }
    let ok = failures.is_empty();
    let detail = if ok { "norm, commutation, pauli xor, tcf n=8 all green".to_string() } else { failures.join("; ") };
    (ok, detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("game values", c1_game_values),
        ("poq correctness", c2_poq_correctness),
        ("poq soundness witness", c3_poq_soundness),
        ("oblivious pad correctness", c4_opad_correctness),
        ("oblivious pad range sampling", c5_opad_range_sampling),
        ("(1,1) compiler on kcbs", c6_one_one_kcbs),
        ("(|C|,1) compiler", c7_all_but_none),
        ("(|C|-1,1) compiler on magic square", c8_all_but_one),
        ("reduction identity", c9_reduction_identity),
        ("decision faithfulness", c10_faithfulness),
        ("property suites", c11_properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += usize::from(!ok);
        println!(
            "[{}] criterion {:>2} {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
