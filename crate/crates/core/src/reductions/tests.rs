use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};

use super::*;
use crate::compilers::{truthtable_prover, CompilerKind};
use crate::games::{kcbs, magic_square, ContextualityGame};
use crate::qfhe::FheBackend;

fn kcbs_one_one() -> (ContextualityGame, CompiledGame) {
    let (g, _) = kcbs();
    let c = CompiledGame::new(&g, CompilerKind::OneOne).unwrap();
    (g, c)
}

fn config() -> CompilerConfig {
    CompilerConfig::default()
}

fn table(v: &[i64]) -> Assignment {
    Assignment(v.to_vec())
}

fn half_split(compiled: &CompiledGame) -> QuestionDependentProver {
    let n = compiled.sets().len();
    let weights: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.7 } else { 0.3 }).collect();
    QuestionDependentProver::two_tables(
        compiled,
        &table(&[1, 0, 1, 0, 0]),
        &table(&[0, 1, 0, 1, 0]),
        &weights,
    )
    .unwrap()
}

#[test]
fn truth_table_prover_is_its_own_table() {
    let (g, compiled) = kcbs_one_one();
    let tau = g.nc_value().unwrap().table;
    let p = truthtable_prover(&compiled, &tau).unwrap();
    for input in 0..compiled.sets().len() {
        assert_eq!(extract_truthtable(&p, &compiled, input, &config(), input as u64).unwrap(), tau);
    }
}

#[test]
fn question_dependent_tables_differ_across_inputs() {
    let (_, compiled) = kcbs_one_one();
    let p = QuestionDependentProver::leaking(&compiled).unwrap();
    let tables: Vec<Assignment> = (0..compiled.sets().len())
        .map(|i| extract_truthtable(&p, &compiled, i, &config(), 7).unwrap())
        .collect();
    for (i, t) in tables.iter().enumerate() {
        assert_eq!(p.distribution(i).keys().next().unwrap(), t);
        assert!(tables[..i].iter().all(|u| u != t));
    }
}

#[test]
fn extraction_is_deterministic_per_seed() {
    let (_, compiled) = kcbs_one_one();
    let p = half_split(&compiled);
    let run = |seed| extract_truthtable(&p, &compiled, 0, &config(), seed).unwrap();
    assert!((0..30).all(|s| run(s) == run(s)));
    assert!((0..30).any(|s| run(s) != run(0)));
}

#[test]
fn out_of_range_input_is_rejected() {
    let (_, compiled) = kcbs_one_one();
    let p = half_split(&compiled);
    assert!(matches!(
        extract_truthtable(&p, &compiled, 10, &config(), 0),
        Err(ReductionError::InputOutOfRange { input: 10, sets: 10 })
    ));
}

/// Answers round 2 from a shared counter, so replays disagree.
struct Flaky {
    inner: TableProver,
    calls: AtomicI64,
}

impl CompiledProver for Flaky {
    type Memory = ();

    fn round1(
        &self,
        compiled: &CompiledGame,
        message: &Message1,
        oracle: &mut PhaseOracle,
        rng: &mut SimRng,
    ) -> std::result::Result<(Message2, ()), CompilerError> {
        self.inner.round1(compiled, message, oracle, rng)
    }

    fn round2(
        &self,
        _: &CompiledGame,
        _: (),
        _: &Message3,
        _: &mut SimRng,
    ) -> std::result::Result<i64, CompilerError> {
        Ok(self.calls.fetch_add(1, Ordering::Relaxed) % 2)
    }
}

impl ReplayableProver for Flaky {}

#[test]
fn unreplayable_prover_is_rejected() {
    let (g, compiled) = kcbs_one_one();
    let p = Flaky {
        inner: truthtable_prover(&compiled, &g.nc_value().unwrap().table).unwrap(),
        calls: AtomicI64::new(0),
    };
    assert_eq!(
        extract_truthtable(&p, &compiled, 0, &config(), 1),
        Err(ReductionError::NotReplayable)
    );
}

#[test]
fn frequencies_are_distributions() {
    let (g, compiled) = kcbs_one_one();
    let p = half_split(&compiled);
    let dist = estimate_table_distributions(&p, &compiled, &[0, 9], &config(), 400, 2).unwrap();
    for k in 0..2 {
        assert!((dist.frequencies(k).values().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    let tau = g.nc_value().unwrap().table;
    let tt = truthtable_prover(&compiled, &tau).unwrap();
    let point = estimate_table_distributions(&tt, &compiled, &[3], &config(), 50, 3).unwrap();
    assert_eq!(point.inputs[0].counts, vec![(tau, 50)]);
}

#[test]
fn precision_schedule_meets_its_target() {
    let eps = 0.2;
    let trials = precision_trials(eps);
    assert_eq!(trials, 2000);
    let (_, compiled) = kcbs_one_one();
    let p = half_split(&compiled);
    let dist = estimate_table_distributions(&p, &compiled, &[0, 9], &config(), trials, 4).unwrap();
    for (k, input) in [0, 9].into_iter().enumerate() {
        let err = l1_distance(&dist.frequencies(k), &p.distribution(input));
        assert!(err <= eps, "input {input}: {err}");
    }
}

fn dist_of(rows: Vec<Vec<(Assignment, u64)>>, trials: u64) -> ConditionalTableDistribution {
    ConditionalTableDistribution {
        trials,
        inputs: rows
            .into_iter()
            .enumerate()
            .map(|(input, counts)| InputTables { input, counts })
            .collect(),
    }
}

#[test]
fn plan_edge_cases() {
    let (a, b) = (table(&[0]), table(&[1]));
    let same = dist_of(vec![vec![(a.clone(), 5), (b.clone(), 5)]; 2], 10);
    let plan = build_distinguisher(&same).unwrap();
    assert!(plan.useless());
    assert!(plan.t1.is_empty(), "ties go to t0");

    let disjoint = dist_of(vec![vec![(a.clone(), 4)], vec![(b.clone(), 4)]], 4);
    let plan = build_distinguisher(&disjoint).unwrap();
    assert_eq!(plan.l1, 2.0);
    assert!(!plan.guess(&a) && plan.guess(&b));
    let p = |t: &Assignment| BTreeMap::from([(t.clone(), 1.0)]);
    assert_eq!(plan.win_probability(&p(&a), &p(&b)), 1.0);

    let one = dist_of(vec![vec![(a, 1)]], 1);
    assert_eq!(build_distinguisher(&one), Err(ReductionError::TooFewInputs(1)));
}

#[test]
fn plan_picks_the_farthest_pair() {
    let (a, b) = (table(&[0]), table(&[1]));
    let d = dist_of(
        vec![
            vec![(a.clone(), 5), (b.clone(), 5)],
            vec![(a.clone(), 6), (b.clone(), 4)],
            vec![(a.clone(), 1), (b.clone(), 9)],
        ],
        10,
    );
    let plan = build_distinguisher(&d).unwrap();
    assert_eq!((plan.input0, plan.input1), (1, 2));
    assert!((plan.l1 - 1.0).abs() < 1e-12);
    assert!(plan.t0.contains(&a) && plan.t1.contains(&b));
}

#[test]
fn distribution_json_round_trip() {
    let (_, compiled) = kcbs_one_one();
    let p = half_split(&compiled);
    let dist = estimate_table_distributions(&p, &compiled, &[0, 5], &config(), 20, 5).unwrap();
    let back: ConditionalTableDistribution =
        serde_json::from_str(&serde_json::to_string(&dist).unwrap()).unwrap();
    assert_eq!(back, dist);
}

fn check_identity(p: &QuestionDependentProver, compiled: &CompiledGame, cfg: &CompilerConfig, seed: u64) -> f64 {
    let report = a2_reduction(p, compiled, cfg, 1000, 10_000, seed).unwrap();
    let plan = &report.plan;
    let (p0, p1) = (p.distribution(plan.input0), p.distribution(plan.input1));
    let predicted = 0.5 + 0.25 * l1_distance(&p0, &p1);
    assert!((plan.win_probability(&p0, &p1) - predicted).abs() < 1e-12, "plan is optimal");
    assert!(report.rate.within(predicted, 0.015), "{:?} vs {predicted}", report.rate);
    report.rate.rate
}

#[test]
fn a2_advantage_matches_the_distance() {
    let (_, compiled) = kcbs_one_one();
    let leaking = QuestionDependentProver::leaking(&compiled).unwrap();
    assert_eq!(check_identity(&leaking, &compiled, &config(), 6), 1.0);
    let split = half_split(&compiled);
    assert!(check_identity(&split, &compiled, &config(), 7) >= 0.6);
}

#[test]
fn a2_rate_ignores_the_backend_leak() {
    let (_, compiled) = kcbs_one_one();
    let split = half_split(&compiled);
    let leaky = CompilerConfig {
        fhe: FheBackend::Leaky,
        ..config()
    };
    check_identity(&split, &compiled, &leaky, 8);
}

#[test]
fn a2_against_a_truth_table_is_a_coin_flip() {
    let (ms, _) = magic_square();
    let compiled = CompiledGame::new(&ms, CompilerKind::AllButOneOne).unwrap();
    let tt = truthtable_prover(&compiled, &ms.nc_value().unwrap().table).unwrap();
    let report = a2_reduction(&tt, &compiled, &config(), 20, 4_000, 9).unwrap();
    assert!(report.plan.useless());
    assert!(report.rate.within(0.5, 0.025), "{:?}", report.rate);
}

#[test]
fn dind_prime_baselines() {
    let messages: Vec<Vec<bool>> = (0..4u64).map(|m| bits::to_vec(m, 2)).collect();
    let mut rng = rng_from_seed(10);
    let skewed = [0.55, 0.15, 0.15, 0.15];
    let mode = dind_prime_game(
        &mut MostLikely::for_weights(&skewed),
        FheBackend::XorStub,
        8,
        &messages,
        &skewed,
        5_000,
        &mut rng,
    )
    .unwrap();
    assert!(mode.within(0.55, 0.02), "{mode:?}");
    let uniform = [0.25; 4];
    let random = dind_prime_game(&mut UniformGuess(4), FheBackend::XorStub, 8, &messages, &uniform, 5_000, &mut rng)
        .unwrap();
    assert!(random.within(0.25, 0.02), "{random:?}");
    let leak = dind_prime_game(
        &mut LeakMatcher(messages.clone()),
        FheBackend::Leaky,
        8,
        &messages,
        &uniform,
        500,
        &mut rng,
    )
    .unwrap();
    assert_eq!(leak.rate, 1.0);
    let stub = dind_prime_game(&mut LeakMatcher(messages.clone()), FheBackend::XorStub, 8, &messages, &uniform, 2_000, &mut rng)
        .unwrap();
    assert!(stub.within(0.25, 0.03));
    assert!(dind_prime_game(&mut UniformGuess(4), FheBackend::XorStub, 8, &messages, &[0.5; 4], 1, &mut rng).is_err());
}
