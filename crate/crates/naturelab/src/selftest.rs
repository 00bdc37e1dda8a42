//! Built-in invariant suite behind the `selftest` CLI command.
//!
//! A quick cross-section of the library's contracts, each printed as one
//! pass/fail line. Deliberately lighter than the test suite — it exists
//! so a packaged binary can vouch for itself.

use std::sync::Arc;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::agent::AgentConfig;
use crate::agent::Monitoring;
use crate::bounds::theoretical_k;
use crate::engine::{estimate_delta_optimality, run_episode, EstimateSpec};
use crate::error::{Error, Result};
use crate::nature::NatureConfig;
use crate::problem::{mirror_trap_pair, DecisionProblem};
use crate::rational::{rat, rat_int, Rat};
use crate::rng::SeedPlan;

struct Runner {
    failures: u32,
}

impl Runner {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("  PASS  {name}: {detail}");
        } else {
            self.failures += 1;
            println!("  FAIL  {name}: {detail}");
        }
    }
}

fn random_problem(rng: &mut ChaCha8Rng, max_side: usize) -> DecisionProblem {
    let n_a = rng.random_range(1..=max_side);
    let n_s = rng.random_range(1..=max_side);
    let payoffs: Vec<Rat> = (0..n_a * n_s)
        .map(|_| rat(rng.random_range(1..=400), rng.random_range(1..=4)))
        .collect();
    DecisionProblem::new(
        "fuzz",
        (0..n_a).map(|i| format!("a{i}")).collect(),
        (0..n_s).map(|i| format!("s{i}")).collect(),
        payoffs,
    )
    .expect("positive by construction")
}

/// Run the suite; Err if any check fails.
pub fn run(seed: u64) -> Result<()> {
    println!("selftest (seed {seed})");
    let mut r = Runner { failures: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // exact criterion values on the built-in pair
    let (d1, d2) = mirror_trap_pair();
    let cr1 = d1.competitive_ratio();
    let cr2 = d2.competitive_ratio();
    r.check(
        "criterion-values",
        cr1.value == rat_int(5)
            && cr1.optimal_actions == vec![1]
            && cr2.value == rat_int(10)
            && cr2.optimal_actions == vec![0]
            && d1.safety_level().value == rat_int(2),
        format!("CR1={}, CR2={}", cr1.value, cr2.value),
    );

    // worst-case guarantees on random problems
    let mut guarantee_ok = true;
    for _ in 0..200 {
        let p = random_problem(&mut rng, 5);
        let cr = p.competitive_ratio();
        let sl = p.safety_level();
        for s in 0..p.state_count() {
            for &a in &cr.optimal_actions {
                guarantee_ok &= p.payoff(a, s) * &cr.value >= p.max_payoff(s).unwrap();
            }
            for &a in &sl.optimal_actions {
                guarantee_ok &= p.payoff(a, s) >= &sl.value;
            }
        }
    }
    r.check(
        "worst-case-guarantees",
        guarantee_ok,
        "200 random problems".into(),
    );

    // safety learner: at most n_A - 1 sub-safety stages, exact count
    let mut learner_ok = true;
    let mut worst = 0u64;
    for i in 0..500 {
        let p = Arc::new(random_problem(&mut rng, 5));
        let horizon = rng.random_range(1..=200u64);
        let nature = NatureConfig::StationaryRandom { seed: seed ^ (i as u64) };
        let trace = run_episode(
            &p,
            &AgentConfig::SafetyLearner,
            &nature,
            Monitoring::Imperfect,
            horizon,
            SeedPlan::new(i as u64),
            0,
        )?;
        let v = p.safety_level().value;
        let bad = horizon - trace.safety_count(&v);
        worst = worst.max(bad);
        learner_ok &= bad <= (p.action_count() as u64).saturating_sub(1);
    }
    r.check(
        "safety-learner-bound",
        learner_ok,
        format!("500 runs, worst sub-safety count {worst}"),
    );

    // explorer coin frequency over 20k stages
    {
        let p = Arc::new(mirror_trap_pair().0);
        let trace = run_episode(
            &p,
            &AgentConfig::CrExplorer { delta: rat(1, 2) },
            &NatureConfig::Uniform,
            Monitoring::Perfect,
            20_000,
            SeedPlan::new(seed),
            0,
        )?;
        let zeros = trace.records.iter().filter(|r| r.coin == Some(false)).count();
        let f = zeros as f64 / 20_000.0;
        r.check(
            "explorer-coin-frequency",
            (f - 1.0 / 16.0).abs() < 0.02,
            format!("explore fraction {f:.4} (target 0.0625)"),
        );
    }

    // stage bound oracle values
    r.check(
        "stage-bound-values",
        theoretical_k(&rat(1, 2), 2)? == 3906 && theoretical_k(&rat(1, 5), 2)? == 33198,
        "K(0.5, 2) = 3906, K(0.2, 2) = 33198".into(),
    );

    // reproducibility of a small estimate
    {
        let p = Arc::new(mirror_trap_pair().0);
        let spec = || EstimateSpec {
            problem: Arc::clone(&p),
            agent: AgentConfig::CrExplorer { delta: rat(1, 2) },
            nature: NatureConfig::Uniform,
            monitoring: Monitoring::Perfect,
            delta: rat(1, 2),
            k: 50,
            horizon: 500,
            replications: 8,
            master_seed: seed,
            confidence_level: 0.95,
            config_echo: json!({}),
        };
        let a = estimate_delta_optimality(&spec())?;
        let b = estimate_delta_optimality(&spec())?;
        r.check(
            "estimate-reproducibility",
            a.success_count == b.success_count
                && a.per_t_fraction_curve == b.per_t_fraction_curve,
            format!("{}/{} successes twice", a.success_count, a.replications),
        );
    }

    if r.failures > 0 {
        Err(Error::Integrity(format!(
            "selftest: {} check(s) failed",
            r.failures
        )))
    } else {
        println!("selftest: all checks passed");
        Ok(())
    }
}
