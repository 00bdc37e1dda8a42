//! Built-in counterexample reproductions.
//!
//! **Mirror demo** — a pure (deterministic) agent plays against the
//! state-mirroring adversary. The mirror only ever produces the play
//! pairs (a1, s1) and (a2, s2), whose payoffs agree across the built-in
//! problem pair, so one run scores against both problems at once. Each
//! reachable pair attains the competitive ratio in exactly one of the two
//! problems, hence N¹_T + N²_T = T at every stage and the worse success
//! fraction can never exceed 1/2.
//!
//! **Masked-state demo** — a payoff-only agent plays against uniform
//! state draws on a problem pair whose rows are permutations of each
//! other. The agent's observation law is identical on both problems, so
//! whatever long-run frequency p it gives the first action yields success
//! fractions f₁ ≈ p and f₂ ≈ 1 − p/3; min(f₁, f₂) is maximized at
//! p = 3/4, an inescapable ceiling of 3/4.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::agent::{AgentConfig, Feedback, Monitoring};
use crate::engine::{log_spaced_stages, run_episode};
use crate::error::{Error, Result};
use crate::nature::NatureConfig;
use crate::problem::{masked_state_pair, mirror_trap_pair, DecisionProblem};
use crate::rational::{format_rational, rat_int, Rat};
use crate::rng::SeedPlan;

// ── Mirror demo ───────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct MirrorDemoReport {
    pub horizon: u64,
    pub master_seed: u64,
    pub agent: Value,
    /// (T, N¹_T/T, N²_T/T) at log-spaced stages.
    pub fraction_table: Vec<(u64, f64, f64)>,
    /// Does N¹_T + N²_T = T hold at every single stage.
    pub identity_holds: bool,
    pub final_fraction_1: f64,
    pub final_fraction_2: f64,
    pub min_final_fraction: f64,
}

impl MirrorDemoReport {
    pub fn to_value(&self) -> Value {
        json!({
            "demo": "mirror-adversary-vs-pure-agent",
            "horizon": self.horizon,
            "master_seed": self.master_seed,
            "agent": self.agent,
            "identity_n1_plus_n2_equals_t": self.identity_holds,
            "final_fraction_problem1": self.final_fraction_1,
            "final_fraction_problem2": self.final_fraction_2,
            "min_final_fraction": self.min_final_fraction,
            "fraction_table": self.fraction_table.iter().map(|(t, f1, f2)| {
                json!({"t": t, "fraction_problem1": f1, "fraction_problem2": f2})
            }).collect::<Vec<_>>(),
        })
    }
}

/// Run a pure agent against the mirror adversary and score the single
/// realized play sequence against both problems of the mirror-trap pair.
pub fn mirror_demo(agent: &AgentConfig, horizon: u64, master_seed: u64) -> Result<MirrorDemoReport> {
    if !agent.is_pure() {
        return Err(Error::Contract(format!(
            "the mirror demo needs a pure agent, but kind {:?} is stochastic",
            agent.kind()
        )));
    }
    let (d1, d2) = mirror_trap_pair();
    let d1 = Arc::new(d1);
    // The episode runs on problem 1; on the mirror-reachable diagonal the
    // payoffs of the two problems coincide, so the same action/state
    // sequence is what problem 2 would have produced as well.
    for a in 0..2 {
        debug_assert_eq!(d1.payoff(a, a), d2.payoff(a, a));
    }
    let trace = run_episode(
        &d1,
        agent,
        &NatureConfig::Mirror,
        Monitoring::Perfect,
        horizon,
        SeedPlan::new(master_seed),
        0,
    )?;

    let cr1 = d1.competitive_ratio().value;
    let cr2 = d2.competitive_ratio().value;
    let mut n1 = 0u64;
    let mut n2 = 0u64;
    let mut identity_holds = true;
    let samples = log_spaced_stages(horizon, 24);
    let mut fraction_table = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;
    for r in &trace.records {
        n1 += u64::from(d1.true_ratio(r.action, r.state).expect("in range") <= cr1);
        n2 += u64::from(d2.true_ratio(r.action, r.state).expect("in range") <= cr2);
        if n1 + n2 != r.t {
            identity_holds = false;
        }
        if next_sample < samples.len() && samples[next_sample] == r.t {
            fraction_table.push((r.t, n1 as f64 / r.t as f64, n2 as f64 / r.t as f64));
            next_sample += 1;
        }
    }
    let f1 = n1 as f64 / horizon as f64;
    let f2 = n2 as f64 / horizon as f64;
    Ok(MirrorDemoReport {
        horizon,
        master_seed,
        agent: agent.to_value(),
        fraction_table,
        identity_holds,
        final_fraction_1: f1,
        final_fraction_2: f2,
        min_final_fraction: f1.min(f2),
    })
}

// ── Masked-state demo ─────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct MaskedDemoReport {
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: u64,
    pub agent: Value,
    pub params: (Rat, Rat, Rat),
    /// Mean success fraction across replications, per problem.
    pub fraction_1: f64,
    pub fraction_2: f64,
    pub min_fraction: f64,
    /// Analytic ceiling on min(f1, f2): 3/4.
    pub ceiling: f64,
    /// Did the coupled observation-stream check produce identical action
    /// sequences on the two problems.
    pub premise_holds: bool,
}

impl MaskedDemoReport {
    pub fn to_value(&self) -> Value {
        json!({
            "demo": "masked-states-under-imperfect-monitoring",
            "horizon": self.horizon,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "agent": self.agent,
            "params": {
                "a": format_rational(&self.params.0),
                "b": format_rational(&self.params.1),
                "c": format_rational(&self.params.2),
            },
            "fraction_problem1": self.fraction_1,
            "fraction_problem2": self.fraction_2,
            "min_fraction": self.min_fraction,
            "analytic_ceiling": self.ceiling,
            "indistinguishability_premise_holds": self.premise_holds,
        })
    }
}

/// The state permutation that maps problem 1's second row onto problem
/// 2's: π(0)=2, π(1)=0, π(2)=1 (0-based).
const MASK_PERMUTATION: [usize; 3] = [2, 0, 1];

/// Feed one agent uniform-Nature observations from problem 1 and a clone
/// of it the π-coupled observations from problem 2. Payoff streams are
/// then identical, so a payoff-only agent must produce identical action
/// sequences — the machine check of the indistinguishability premise.
fn coupled_action_sequences_match(
    agent: &AgentConfig,
    d1: &DecisionProblem,
    d2: &DecisionProblem,
    horizon: u64,
    plan: SeedPlan,
) -> Result<bool> {
    // matrix-level premise: first rows identical, second rows permuted
    for s in 0..3 {
        if d1.payoff(0, s) != d2.payoff(0, s)
            || d1.payoff(1, s) != d2.payoff(1, MASK_PERMUTATION[s])
        {
            return Ok(false);
        }
    }
    let mut agent_1 = agent.build(d1)?;
    let mut agent_2 = agent.build(d2)?;
    let mut rng_1 = plan.agent_rng(0);
    let mut rng_2 = plan.agent_rng(0);
    let mut state_rng = plan.nature_rng(0);
    let mut uniform = crate::nature::UniformNature::new(3);
    let mut history = Vec::new();
    for t in 1..=horizon {
        let c1 = agent_1.choose(&mut rng_1);
        let c2 = agent_2.choose(&mut rng_2);
        if c1.action != c2.action {
            return Ok(false);
        }
        let state = {
            let mut ctx = crate::nature::NatureContext {
                t,
                imminent_action: c1.action,
                action_history: &history,
                rng: &mut state_rng,
            };
            crate::nature::NatureSession::choose(&mut uniform, &mut ctx)?
        };
        history.push(c1.action);
        // problem 2 sees state π(state) when the second action was played,
        // which makes its payoff equal problem 1's by construction
        let state_2 = if c1.action == 1 { MASK_PERMUTATION[state] } else { state };
        let payoff_1 = d1.payoff(c1.action, state).clone();
        let payoff_2 = d2.payoff(c2.action, state_2).clone();
        if payoff_1 != payoff_2 {
            return Ok(false);
        }
        agent_1.observe(c1.action, &Feedback::Imperfect { payoff: payoff_1 })?;
        agent_2.observe(c2.action, &Feedback::Imperfect { payoff: payoff_2 })?;
    }
    Ok(true)
}

pub struct MaskedDemoSpec {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub agent: AgentConfig,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: u64,
}

/// Run the same payoff-only agent configuration against uniform Nature on
/// both problems of the masked pair and report mean success fractions.
pub fn masked_demo(spec: &MaskedDemoSpec) -> Result<MaskedDemoReport> {
    if spec.replications == 0 || spec.horizon == 0 {
        return Err(Error::Argument(
            "replications and horizon must be >= 1".into(),
        ));
    }
    if !spec
        .agent
        .required_monitoring()
        .accepts(Monitoring::Imperfect)
    {
        return Err(Error::Config(format!(
            "the masked-state demo runs under imperfect monitoring, but agent kind {:?} \
             needs revealed states",
            spec.agent.kind()
        )));
    }
    let (d1, d2) = masked_state_pair(&spec.a, &spec.b, &spec.c)?;
    // structural sanity on the pair: first problem's unique benchmark
    // action is a1, second problem's is a2, and a1's bad state in the
    // second problem is exactly s3
    debug_assert_eq!(d1.competitive_ratio().value, rat_int(1));
    debug_assert_eq!(d1.competitive_ratio().optimal_actions, vec![0]);
    debug_assert_eq!(d2.competitive_ratio().optimal_actions, vec![1]);

    let d1 = Arc::new(d1);
    let d2 = Arc::new(d2);
    let plan = SeedPlan::new(spec.master_seed);
    let per_rep: Vec<(f64, f64)> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let mut fractions = [0.0; 2];
            for (i, problem) in [&d1, &d2].into_iter().enumerate() {
                let trace = run_episode(
                    problem,
                    &spec.agent,
                    &NatureConfig::Uniform,
                    Monitoring::Imperfect,
                    spec.horizon,
                    plan,
                    rep,
                )?;
                fractions[i] = trace.final_success_count() as f64 / spec.horizon as f64;
            }
            Ok((fractions[0], fractions[1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let f1 = per_rep.iter().map(|p| p.0).sum::<f64>() / spec.replications as f64;
    let f2 = per_rep.iter().map(|p| p.1).sum::<f64>() / spec.replications as f64;

    let premise_holds = coupled_action_sequences_match(
        &spec.agent,
        &d1,
        &d2,
        spec.horizon.min(2_000),
        plan,
    )?;

    Ok(MaskedDemoReport {
        horizon: spec.horizon,
        replications: spec.replications,
        master_seed: spec.master_seed,
        agent: spec.agent.to_value(),
        params: (spec.a.clone(), spec.b.clone(), spec.c.clone()),
        fraction_1: f1,
        fraction_2: f2,
        min_fraction: f1.min(f2),
        ceiling: 0.75,
        premise_holds,
    })
}

/// Default masked-pair parameters: a=100, b=20, c=4.
pub fn default_masked_params() -> (Rat, Rat, Rat) {
    (rat_int(100), rat_int(20), rat_int(4))
}
