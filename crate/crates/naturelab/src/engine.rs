//! The repeated-game engine.
//!
//! Runs episodes stage by stage: the agent commits to an action without
//! seeing the current state, Nature picks the state (seeing the agent's
//! committed action only when the adversary is allowed to peek), the
//! engine scores the stage against the true competitive ratio, and the
//! agent receives feedback shaped by the monitoring regime. On top of
//! single episodes sits a Monte Carlo estimator for the probability that
//! the benchmark fraction stays above 1 − δ from stage K through the
//! horizon.

use std::sync::Arc;
use std::time::Instant;

use num::bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::agent::{AgentConfig, Feedback, Monitoring};
use crate::error::{Error, Result};
use crate::nature::{NatureConfig, NatureContext};
use crate::problem::DecisionProblem;
use crate::rational::{format_rational, to_f64, Rat};
use crate::rng::SeedPlan;

/// One stage of an episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    /// 1-based stage index.
    pub t: u64,
    pub action: usize,
    pub state: usize,
    pub payoff: Rat,
    /// Exploit/explore coin where the strategy has one.
    pub coin: Option<bool>,
    /// Did this stage attain the competitive ratio.
    pub success: bool,
    /// Successes among stages 1..=t.
    pub cumulative_successes: u64,
}

/// A full episode history plus the configuration that produced it.
#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<StageRecord>,
    pub problem_label: String,
    pub agent_config: Value,
    pub nature_config: Value,
    pub monitoring: Monitoring,
    pub master_seed: u64,
    pub replication: u64,
}

impl Trace {
    pub fn final_success_count(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_successes)
    }

    /// Stages where the payoff reached the given safety level.
    pub fn safety_count(&self, v: &Rat) -> u64 {
        self.records.iter().filter(|r| &r.payoff >= v).count() as u64
    }
}

/// Check that the agent's feedback shape matches the requested monitoring
/// and that a peeking adversary only ever faces a pure agent.
fn check_wiring(agent: &AgentConfig, nature: &NatureConfig, monitoring: Monitoring) -> Result<()> {
    if !agent.required_monitoring().accepts(monitoring) {
        return Err(Error::Config(format!(
            "agent kind {:?} is built for {} feedback but the experiment requests {} monitoring",
            agent.kind(),
            match agent.required_monitoring() {
                crate::agent::MonitoringReq::PerfectOnly => "perfect",
                crate::agent::MonitoringReq::ImperfectOnly => "imperfect",
                crate::agent::MonitoringReq::Either => "any",
            },
            monitoring.as_str(),
        )));
    }
    if nature.peeks_at_agent() && !agent.is_pure() {
        return Err(Error::Contract(format!(
            "the mirror adversary is defined against pure strategies only, \
             but agent kind {:?} is stochastic",
            agent.kind()
        )));
    }
    Ok(())
}

/// Run one episode of `horizon` stages.
pub fn run_episode(
    problem: &Arc<DecisionProblem>,
    agent_config: &AgentConfig,
    nature_config: &NatureConfig,
    monitoring: Monitoring,
    horizon: u64,
    plan: SeedPlan,
    replication: u64,
) -> Result<Trace> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be >= 1".into()));
    }
    check_wiring(agent_config, nature_config, monitoring)?;
    let mut agent = agent_config.build(problem)?;
    let mut nature = nature_config.build(problem)?;

    let mut agent_rng = plan.agent_rng(replication);
    let mut nature_rng = plan.nature_rng(replication);
    let success = problem.success_table();

    let mut records = Vec::with_capacity(horizon as usize);
    let mut action_history: Vec<usize> = Vec::with_capacity(horizon as usize);
    let mut cumulative = 0u64;

    for t in 1..=horizon {
        let choice = agent.choose(&mut agent_rng);
        let state = {
            let mut ctx = NatureContext {
                t,
                imminent_action: choice.action,
                action_history: &action_history,
                rng: &mut nature_rng,
            };
            nature.choose(&mut ctx)?
        };
        let payoff = problem.payoff(choice.action, state).clone();
        let ok = success[choice.action][state];
        cumulative += u64::from(ok);
        records.push(StageRecord {
            t,
            action: choice.action,
            state,
            payoff: payoff.clone(),
            coin: choice.coin,
            success: ok,
            cumulative_successes: cumulative,
        });
        action_history.push(choice.action);
        let feedback = match monitoring {
            Monitoring::Perfect => Feedback::Perfect { state, payoff },
            Monitoring::Imperfect => Feedback::Imperfect { payoff },
        };
        agent.observe(choice.action, &feedback)?;
    }

    Ok(Trace {
        records,
        problem_label: problem.label().to_string(),
        agent_config: agent_config.to_value(),
        nature_config: nature_config.to_value(),
        monitoring,
        master_seed: plan.master_seed,
        replication,
    })
}

/// Did the success fraction stay at or above 1 − δ for every stage in
/// [k, horizon]? Exact rational comparison per stage.
pub fn holds_from_k(trace: &Trace, delta: &Rat, k: u64) -> bool {
    // N_t >= (1-δ)t  <=>  q·N_t >= (q-p)·t  for δ = p/q
    let p = delta.numer();
    let q = delta.denom();
    let good_num = q - p;
    trace
        .records
        .iter()
        .filter(|r| r.t >= k)
        .all(|r| BigInt::from(r.cumulative_successes) * q >= BigInt::from(r.t) * &good_num)
}

/// Everything the Monte Carlo estimator reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub replications: u64,
    pub success_count: u64,
    pub probability_estimate: f64,
    pub confidence_level: f64,
    pub confidence_interval: (f64, f64),
    pub delta: Rat,
    pub k: u64,
    pub horizon: u64,
    /// What the estimate is a proxy for; the event is checked only up to
    /// the horizon, never beyond it.
    pub event: String,
    /// Mean success fraction N_T/T across replications, sampled at
    /// log-spaced stages.
    pub per_t_fraction_curve: Vec<(u64, f64)>,
    pub config_echo: Value,
    pub master_seed: u64,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn meets_target(&self) -> bool {
        self.probability_estimate >= 1.0 - to_f64(&self.delta)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "replications": self.replications,
            "success_count": self.success_count,
            "probability_estimate": self.probability_estimate,
            "confidence_level": self.confidence_level,
            "confidence_interval": {
                "lo": self.confidence_interval.0,
                "hi": self.confidence_interval.1,
            },
            "delta": format_rational(&self.delta),
            "k": self.k,
            "horizon": self.horizon,
            "event": self.event,
            "per_t_fraction_curve": self.per_t_fraction_curve
                .iter()
                .map(|(t, f)| json!({"t": t, "mean_fraction": f}))
                .collect::<Vec<_>>(),
            "config": self.config_echo,
            "master_seed": self.master_seed,
            "wall_time_secs": self.wall_time_secs,
        })
    }
}

/// Two-sided Clopper–Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    use statrs::distribution::{Beta, ContinuousCDF};
    assert!(trials > 0 && successes <= trials);
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .expect("valid shape parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid shape parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Log-spaced stage indices in [1, horizon], deduplicated, ending at the
/// horizon. Keeps report curves small.
pub fn log_spaced_stages(horizon: u64, points: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(points);
    let ln_h = (horizon as f64).ln();
    for i in 0..points {
        let x = (ln_h * i as f64 / (points.saturating_sub(1).max(1)) as f64).exp();
        out.push((x.round() as u64).clamp(1, horizon));
    }
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

pub struct EstimateSpec {
    pub problem: Arc<DecisionProblem>,
    pub agent: AgentConfig,
    pub nature: NatureConfig,
    pub monitoring: Monitoring,
    pub delta: Rat,
    pub k: u64,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: u64,
    pub confidence_level: f64,
    /// Full resolved config for the report's audit trail.
    pub config_echo: Value,
}

/// Monte Carlo estimate of the probability that N_T ≥ (1−δ)T holds for
/// every T in [K, horizon]. Replications run in parallel on independent
/// substreams; results are identical regardless of thread count.
pub fn estimate_delta_optimality(spec: &EstimateSpec) -> Result<ExperimentReport> {
    if spec.k > spec.horizon {
        return Err(Error::Argument(format!(
            "K = {} exceeds the horizon {}",
            spec.k, spec.horizon
        )));
    }
    if spec.replications == 0 {
        return Err(Error::Argument("replications must be >= 1".into()));
    }
    if !(spec.confidence_level > 0.0 && spec.confidence_level < 1.0) {
        return Err(Error::Argument(format!(
            "confidence_level must be in (0, 1), got {}",
            spec.confidence_level
        )));
    }
    check_wiring(&spec.agent, &spec.nature, spec.monitoring)?;

    let started = Instant::now();
    let plan = SeedPlan::new(spec.master_seed);
    let sample_stages = log_spaced_stages(spec.horizon, 48);

    struct RepOutcome {
        success: bool,
        fractions: Vec<f64>,
    }

    let outcomes: Vec<RepOutcome> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| -> Result<RepOutcome> {
            let trace = run_episode(
                &spec.problem,
                &spec.agent,
                &spec.nature,
                spec.monitoring,
                spec.horizon,
                plan,
                rep,
            )?;
            let fractions = sample_stages
                .iter()
                .map(|&t| {
                    let n_t = trace.records[(t - 1) as usize].cumulative_successes;
                    n_t as f64 / t as f64
                })
                .collect();
            Ok(RepOutcome {
                success: holds_from_k(&trace, &spec.delta, spec.k),
                fractions,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let success_count = outcomes.iter().filter(|o| o.success).count() as u64;
    let per_t_fraction_curve = sample_stages
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean =
                outcomes.iter().map(|o| o.fractions[i]).sum::<f64>() / outcomes.len() as f64;
            (t, mean)
        })
        .collect();

    Ok(ExperimentReport {
        replications: spec.replications,
        success_count,
        probability_estimate: success_count as f64 / spec.replications as f64,
        confidence_level: spec.confidence_level,
        confidence_interval: clopper_pearson(
            success_count,
            spec.replications,
            spec.confidence_level,
        ),
        delta: spec.delta.clone(),
        k: spec.k,
        horizon: spec.horizon,
        event: format!(
            "N_T >= (1 - delta)·T for every T in [{}, {}]; truncated-horizon proxy for the \
             unbounded-T event, which is NOT directly measured",
            spec.k, spec.horizon
        ),
        per_t_fraction_curve,
        config_echo: spec.config_echo.clone(),
        master_seed: spec.master_seed,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
