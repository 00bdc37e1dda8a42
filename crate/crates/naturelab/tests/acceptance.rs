//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantity. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines).

use std::sync::Arc;

use naturelab::agent::{AgentConfig, Monitoring};
use naturelab::bounds::theoretical_k;
use naturelab::demos::{masked_demo, mirror_demo, MaskedDemoSpec};
use naturelab::engine::{estimate_delta_optimality, run_episode, EstimateSpec};
use naturelab::nature::NatureConfig;
use naturelab::problem::{mirror_trap_pair, DecisionProblem};
use naturelab::rational::{rat, rat_int, Rat};
use naturelab::rng::SeedPlan;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

mod fixed_point_log;

fn pass(criterion: &str, detail: String) {
    println!("ACCEPT {criterion}: PASS — {detail}");
}

/// C1 — criterion computations on the built-in 2×2 pair are exact.
#[test]
fn c1_exact_criterion_values() {
    let (d1, d2) = mirror_trap_pair();
    let r1 = d1.competitive_ratio();
    assert_eq!(r1.value, rat_int(5));
    assert_eq!(r1.optimal_actions, vec![1]);
    let r2 = d2.competitive_ratio();
    assert_eq!(r2.value, rat_int(10));
    assert_eq!(r2.optimal_actions, vec![0]);
    // the full ratio matrices, entry by entry
    let c1 = [[30, 1], [1, 5]];
    let c2 = [[10, 1], [1, 15]];
    for a in 0..2 {
        for s in 0..2 {
            assert_eq!(d1.true_ratio(a, s).unwrap(), rat_int(c1[a][s]));
            assert_eq!(d2.true_ratio(a, s).unwrap(), rat_int(c2[a][s]));
        }
    }
    pass("C1", "CR(D1) = (5, {a2}), CR(D2) = (10, {a1}), ratio matrices exact".into());
}

/// C2 — the safety learner pays below the safety level at most n_A − 1
/// times, on every one of 10^4 fuzzed (problem, state-sequence) pairs.
#[test]
fn c2_safety_learner_exact_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let cases = 10_000u32;
    let mut worst = 0u64;
    for case in 0..cases {
        let n_a = rng.random_range(1..=6usize);
        let n_s = rng.random_range(1..=6usize);
        let horizon = rng.random_range(1..=500u64);
        let payoffs: Vec<Rat> = (0..n_a * n_s)
            .map(|_| rat(rng.random_range(1..=1000), rng.random_range(1..=8)))
            .collect();
        let problem = Arc::new(
            DecisionProblem::new(
                format!("fuzz-{case}"),
                (0..n_a).map(|i| format!("a{i}")).collect(),
                (0..n_s).map(|i| format!("s{i}")).collect(),
                payoffs,
            )
            .unwrap(),
        );
        // state sequences: fixed random, constant, or a short cycle
        let nature = match case % 3 {
            0 => NatureConfig::StationaryRandom { seed: case as u64 },
            1 => NatureConfig::StationaryPattern {
                pattern: vec![format!("s{}", rng.random_range(0..n_s))],
            },
            _ => {
                let len = rng.random_range(1..=4usize);
                NatureConfig::StationaryPattern {
                    pattern: (0..len)
                        .map(|_| format!("s{}", rng.random_range(0..n_s)))
                        .collect(),
                }
            }
        };
        let trace = run_episode(
            &problem,
            &AgentConfig::SafetyLearner,
            &nature,
            Monitoring::Imperfect,
            horizon,
            SeedPlan::new(case as u64),
            0,
        )
        .unwrap();
        let v = problem.safety_level().value;
        let sub_safety = horizon - trace.safety_count(&v);
        assert!(
            sub_safety <= n_a as u64 - 1,
            "case {case}: {sub_safety} sub-safety stages with {n_a} actions"
        );
        worst = worst.max(sub_safety);
    }
    pass(
        "C2",
        format!("{cases} fuzzed pairs, zero violations, worst sub-safety count {worst}"),
    );
}

/// C3 — empirical δ-optimality of the explorer at δ = 0.5 on the built-in
/// problem, across four stationary/uniform adversary classes: estimate
/// and its 95% CI lower bound both at or above 1 − δ = 0.5.
#[test]
fn c3_explorer_delta_optimality() {
    let delta = rat(1, 2);
    let k = theoretical_k(&delta, 2).unwrap();
    assert_eq!(k, 3906);
    let problem = Arc::new(mirror_trap_pair().0);
    let adversaries: Vec<(&str, NatureConfig)> = vec![
        (
            "constant-s1",
            NatureConfig::StationaryPattern { pattern: vec!["s1".into()] },
        ),
        (
            "alternating-cycle",
            NatureConfig::StationaryPattern { pattern: vec!["s1".into(), "s2".into()] },
        ),
        ("seeded-random-stationary", NatureConfig::StationaryRandom { seed: 1234 }),
        ("uniform", NatureConfig::Uniform),
    ];
    for (name, nature) in adversaries {
        let report = estimate_delta_optimality(&EstimateSpec {
            problem: Arc::clone(&problem),
            agent: AgentConfig::CrExplorer { delta: delta.clone() },
            nature,
            monitoring: Monitoring::Perfect,
            delta: delta.clone(),
            k,
            horizon: 8_000,
            replications: 400,
            master_seed: 0xC3,
            confidence_level: 0.95,
            config_echo: json!({"adversary": name}),
        })
        .unwrap();
        assert!(
            report.probability_estimate >= 0.5,
            "{name}: estimate {}",
            report.probability_estimate
        );
        assert!(
            report.confidence_interval.0 >= 0.5,
            "{name}: CI lower bound {}",
            report.confidence_interval.0
        );
        pass(
            "C3",
            format!(
                "{name}: estimate {:.4}, 95% CI [{:.4}, {:.4}] (target >= 0.5)",
                report.probability_estimate,
                report.confidence_interval.0,
                report.confidence_interval.1
            ),
        );
    }
}

/// C4 — pure agent vs mirror adversary: N¹_T + N²_T = T at every stage,
/// so the worse fraction is capped at 1/2 < 1 − δ for δ = 0.2.
#[test]
fn c4_mirror_identity() {
    let report = mirror_demo(
        &AgentConfig::GreedyDeterministic { delta: rat(1, 5) },
        10_000,
        0xC4,
    )
    .unwrap();
    assert!(report.identity_holds, "stage identity violated");
    assert!(report.min_final_fraction <= 0.5);
    assert!(0.5 < 1.0 - 0.2);
    pass(
        "C4",
        format!(
            "identity exact over 10^4 stages; min fraction {:.4} <= 0.5 < 0.8",
            report.min_final_fraction
        ),
    );
}

/// C5 — under imperfect monitoring vs uniform Nature on the masked pair,
/// every payoff-only agent's min(f1, f2) stays within the 3/4 ceiling.
#[test]
fn c5_masked_pair_ceiling() {
    let agents: Vec<(&str, AgentConfig)> = vec![
        ("blind-explorer", AgentConfig::CrExplorerBlind { delta: rat(1, 20) }),
        ("always-a1", AgentConfig::Fixed { action: 0 }),
        ("always-a2", AgentConfig::Fixed { action: 1 }),
        ("safety-learner", AgentConfig::SafetyLearner),
        ("uniform-random", AgentConfig::UniformRandom),
    ];
    for (name, agent) in agents {
        let report = masked_demo(&MaskedDemoSpec {
            a: rat_int(100),
            b: rat_int(20),
            c: rat_int(4),
            agent,
            horizon: 30_000,
            replications: 50,
            master_seed: 0xC5,
        })
        .unwrap();
        assert!(
            report.min_fraction <= 0.75 + 0.02,
            "{name}: min fraction {}",
            report.min_fraction
        );
        assert!(report.premise_holds, "{name}: coupled runs diverged");
        pass(
            "C5",
            format!(
                "{name}: f1 {:.4}, f2 {:.4}, min {:.4} <= 0.77; premise holds",
                report.fraction_1, report.fraction_2, report.min_fraction
            ),
        );
    }
}

/// C6 — the explorer's exploration coin comes up at the configured rate:
/// frequency of coin = 0 within 1/16 ± 0.005 over 10^5 stages.
#[test]
fn c6_exploration_rate() {
    let problem = Arc::new(mirror_trap_pair().0);
    let trace = run_episode(
        &problem,
        &AgentConfig::CrExplorer { delta: rat(1, 2) },
        &NatureConfig::Uniform,
        Monitoring::Perfect,
        100_000,
        SeedPlan::new(0xC6),
        0,
    )
    .unwrap();
    let zeros = trace
        .records
        .iter()
        .filter(|r| r.coin == Some(false))
        .count();
    let frequency = zeros as f64 / 100_000.0;
    assert!(
        (frequency - 1.0 / 16.0).abs() <= 0.005,
        "coin-zero frequency {frequency}"
    );
    pass(
        "C6",
        format!("coin-zero frequency {frequency:.5} within 0.0625 ± 0.005 over 10^5 stages"),
    );
}

/// C7 — the stage bound matches an independently coded high-precision
/// evaluation (fixed-point square-root logarithm), exactly, on a 3×3 grid
/// of (δ, n); the two spec-level frozen values are asserted literally.
#[test]
fn c7_stage_bound_oracle_agreement() {
    let deltas = [rat(1, 2), rat(1, 5), rat(1, 10)];
    let ns = [2u32, 3, 5];
    // frozen expected values, precomputed with 60-digit arithmetic
    let frozen: [[u64; 3]; 3] = [
        [3_906, 4_219, 24_873],
        [33_198, 33_198, 184_978],
        [159_400, 159_400, 830_702],
    ];
    for (i, delta) in deltas.iter().enumerate() {
        for (j, &n) in ns.iter().enumerate() {
            let implementation = theoretical_k(delta, n).unwrap();
            let oracle = fixed_point_log::stage_bound_oracle(delta, n);
            assert_eq!(
                implementation, oracle,
                "delta = {delta}, n = {n}: implementation {implementation} vs oracle {oracle}"
            );
            assert_eq!(implementation, frozen[i][j], "frozen value drifted");
        }
    }
    assert_eq!(theoretical_k(&rat(1, 2), 2).unwrap(), 3906);
    assert_eq!(theoretical_k(&rat(1, 5), 2).unwrap(), 33198);
    pass(
        "C7",
        "9 (delta, n) pairs agree with the fixed-point oracle and the frozen table".into(),
    );
}

/// C8 — reproducibility: identical seeds give identical traces (byte
/// level) and identical reports (field level, wall time aside).
#[test]
fn c8_reproducibility() {
    let problem = Arc::new(mirror_trap_pair().0);
    let spec = || EstimateSpec {
        problem: Arc::clone(&problem),
        agent: AgentConfig::CrExplorer { delta: rat(1, 2) },
        nature: NatureConfig::StationaryRandom { seed: 5 },
        monitoring: Monitoring::Perfect,
        delta: rat(1, 2),
        k: 100,
        horizon: 2_000,
        replications: 32,
        master_seed: 0xC8,
        confidence_level: 0.95,
        config_echo: json!({}),
    };
    let a = estimate_delta_optimality(&spec()).unwrap();
    let b = estimate_delta_optimality(&spec()).unwrap();
    let mut va = a.to_value();
    let mut vb = b.to_value();
    va.as_object_mut().unwrap().remove("wall_time_secs");
    vb.as_object_mut().unwrap().remove("wall_time_secs");
    assert_eq!(va, vb, "reports differ beyond wall time");

    let run = || {
        let trace = run_episode(
            &problem,
            &AgentConfig::CrExplorer { delta: rat(1, 2) },
            &NatureConfig::Uniform,
            Monitoring::Perfect,
            2_000,
            SeedPlan::new(0xC8),
            0,
        )
        .unwrap();
        naturelab::export::trace_to_csv(&trace, &problem).unwrap()
    };
    assert_eq!(run(), run(), "trace CSV bytes differ");
    pass("C8", "reports field-identical and trace CSVs byte-identical across reruns".into());
}
