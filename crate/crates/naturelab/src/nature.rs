//! Environment-side (Nature) strategies.
//!
//! Nature holds the true payoff matrix and sees the full action/state
//! history. Stationary strategies replay a fixed sequence regardless of
//! history; the mirror adversary copies a pure agent's imminent action
//! index into a state index; the greedy minimizer plays the state that
//! looks worst for the agent's empirical action mix.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::DecisionProblem;
use crate::rational::{rat_int, Rat};

/// Per-stage context handed to a Nature session. The engine resolves the
/// agent's action first, so adversaries that are allowed to peek (the
/// mirror, defined against pure agents) see `imminent_action`;
/// history-independent strategies simply ignore everything here.
pub struct NatureContext<'a> {
    /// 1-based stage number.
    pub t: u64,
    /// The action the (already-resolved) agent plays this stage.
    pub imminent_action: usize,
    /// All past agent actions, oldest first.
    pub action_history: &'a [usize],
    /// Nature's own random substream.
    pub rng: &'a mut ChaCha8Rng,
}

pub trait NatureSession: Send {
    fn choose(&mut self, ctx: &mut NatureContext<'_>) -> Result<usize>;

    /// Whether this strategy reads the agent's imminent action. Such
    /// strategies are only defined against pure agents.
    fn peeks_at_agent(&self) -> bool {
        false
    }
}

// ── Stationary ────────────────────────────────────────────────────────

/// Fixed cyclic pattern of states, independent of history.
pub struct StationaryPattern {
    pattern: Vec<usize>,
}

impl StationaryPattern {
    pub fn new(pattern: Vec<usize>, n_states: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Config("stationary pattern must not be empty".into()));
        }
        if let Some(&bad) = pattern.iter().find(|&&s| s >= n_states) {
            return Err(Error::Config(format!(
                "stationary pattern contains state index {bad}, but the problem has {n_states} states"
            )));
        }
        Ok(StationaryPattern { pattern })
    }
}

impl NatureSession for StationaryPattern {
    fn choose(&mut self, ctx: &mut NatureContext<'_>) -> Result<usize> {
        Ok(self.pattern[((ctx.t - 1) as usize) % self.pattern.len()])
    }
}

/// A fixed random state sequence: drawn from a private generator seeded
/// once at construction, so every replication faces the *same* sequence.
/// Still stationary — the draw ignores history.
pub struct StationaryRandom {
    rng: ChaCha8Rng,
    n_states: usize,
}

impl StationaryRandom {
    pub fn new(seed: u64, n_states: usize) -> Self {
        StationaryRandom {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n_states,
        }
    }
}

impl NatureSession for StationaryRandom {
    fn choose(&mut self, _ctx: &mut NatureContext<'_>) -> Result<usize> {
        Ok(self.rng.random_range(0..self.n_states))
    }
}

// ── Uniform ───────────────────────────────────────────────────────────

/// Fresh uniform draw per stage from the per-replication substream.
pub struct UniformNature {
    n_states: usize,
}

impl UniformNature {
    pub fn new(n_states: usize) -> Self {
        UniformNature { n_states }
    }
}

impl NatureSession for UniformNature {
    fn choose(&mut self, ctx: &mut NatureContext<'_>) -> Result<usize> {
        Ok(ctx.rng.random_range(0..self.n_states))
    }
}

// ── Mirror ────────────────────────────────────────────────────────────

/// Plays state s^i whenever the (pure) agent is about to play a^i.
pub struct MirrorNature;

impl MirrorNature {
    pub fn new(n_actions: usize, n_states: usize) -> Result<Self> {
        if n_states < n_actions {
            return Err(Error::Config(format!(
                "mirror adversary needs at least as many states as actions \
                 ({n_actions} actions, {n_states} states)"
            )));
        }
        Ok(MirrorNature)
    }
}

impl NatureSession for MirrorNature {
    fn choose(&mut self, ctx: &mut NatureContext<'_>) -> Result<usize> {
        Ok(ctx.imminent_action)
    }

    fn peeks_at_agent(&self) -> bool {
        true
    }
}

// ── Greedy minimizer ──────────────────────────────────────────────────

/// Stress adversary: plays the state minimizing the agent's expected
/// payoff against the empirical frequency of past agent actions (uniform
/// prior before any history). Ties go to the lowest state index.
pub struct GreedyMinimizer {
    problem: Arc<DecisionProblem>,
    /// Running per-state sums of payoffs weighted by action counts,
    /// updated incrementally from the history tail already consumed.
    weighted_sums: Vec<Rat>,
    consumed: usize,
}

impl GreedyMinimizer {
    pub fn new(problem: Arc<DecisionProblem>) -> Self {
        let n_s = problem.state_count();
        GreedyMinimizer {
            problem,
            weighted_sums: vec![rat_int(0); n_s],
            consumed: 0,
        }
    }
}

impl NatureSession for GreedyMinimizer {
    fn choose(&mut self, ctx: &mut NatureContext<'_>) -> Result<usize> {
        let n_s = self.problem.state_count();
        // fold in any history we have not seen yet
        for &a in &ctx.action_history[self.consumed..] {
            for s in 0..n_s {
                self.weighted_sums[s] += self.problem.payoff(a, s);
            }
        }
        self.consumed = ctx.action_history.len();

        // empirical mix, or the uniform prior when there is no history;
        // the positive normalizing constant does not move the argmin
        let scores: Vec<Rat> = if self.consumed == 0 {
            (0..n_s)
                .map(|s| {
                    (0..self.problem.action_count())
                        .map(|a| self.problem.payoff(a, s))
                        .sum()
                })
                .collect()
        } else {
            self.weighted_sums.clone()
        };
        let best = scores.iter().min().expect("at least one state");
        Ok(scores.iter().position(|v| v == best).expect("found above"))
    }
}

// ── Configuration ─────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NatureConfig {
    /// Cyclic pattern of state names.
    StationaryPattern { pattern: Vec<String> },
    /// Fixed random sequence from a dedicated seed.
    StationaryRandom { seed: u64 },
    Uniform,
    Mirror,
    GreedyMinimizer,
}

impl NatureConfig {
    /// Whether the configured adversary reads the agent's imminent action.
    pub fn peeks_at_agent(&self) -> bool {
        matches!(self, NatureConfig::Mirror)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NatureConfig::StationaryPattern { .. } | NatureConfig::StationaryRandom { .. } => {
                "stationary"
            }
            NatureConfig::Uniform => "uniform",
            NatureConfig::Mirror => "mirror",
            NatureConfig::GreedyMinimizer => "greedy_minimizer",
        }
    }

    pub fn build(&self, problem: &Arc<DecisionProblem>) -> Result<Box<dyn NatureSession>> {
        let n_s = problem.state_count();
        Ok(match self {
            NatureConfig::StationaryPattern { pattern } => {
                let indices = pattern
                    .iter()
                    .map(|name| {
                        problem.state_index(name).ok_or_else(|| {
                            Error::Config(format!(
                                "nature.pattern: unknown state {name:?} (problem states: {:?})",
                                problem.state_names()
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Box::new(StationaryPattern::new(indices, n_s)?)
            }
            NatureConfig::StationaryRandom { seed } => Box::new(StationaryRandom::new(*seed, n_s)),
            NatureConfig::Uniform => Box::new(UniformNature::new(n_s)),
            NatureConfig::Mirror => Box::new(MirrorNature::new(problem.action_count(), n_s)?),
            NatureConfig::GreedyMinimizer => Box::new(GreedyMinimizer::new(Arc::clone(problem))),
        })
    }

    pub fn to_value(&self) -> Value {
        match self {
            NatureConfig::StationaryPattern { pattern } => {
                json!({"kind": "stationary", "pattern": pattern})
            }
            NatureConfig::StationaryRandom { seed } => {
                json!({"kind": "stationary", "seed": seed})
            }
            NatureConfig::Uniform => json!({"kind": "uniform"}),
            NatureConfig::Mirror => json!({"kind": "mirror"}),
            NatureConfig::GreedyMinimizer => json!({"kind": "greedy_minimizer"}),
        }
    }

    pub fn from_value(v: &Value, path: &str) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config(format!("{path}: expected an object")))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config(format!("{path}.kind: missing or not a string")))?;
        match kind {
            "stationary" => match (obj.get("pattern"), obj.get("seed")) {
                (Some(p), None) => {
                    let arr = p.as_array().ok_or_else(|| {
                        Error::Config(format!("{path}.pattern: expected an array of state names"))
                    })?;
                    let pattern = arr
                        .iter()
                        .enumerate()
                        .map(|(i, v)| {
                            v.as_str().map(str::to_owned).ok_or_else(|| {
                                Error::Config(format!("{path}.pattern[{i}]: expected a string"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if pattern.is_empty() {
                        return Err(Error::Config(format!("{path}.pattern: must not be empty")));
                    }
                    Ok(NatureConfig::StationaryPattern { pattern })
                }
                (None, Some(s)) => {
                    let seed = s.as_u64().ok_or_else(|| {
                        Error::Config(format!("{path}.seed: expected a non-negative integer"))
                    })?;
                    Ok(NatureConfig::StationaryRandom { seed })
                }
                (Some(_), Some(_)) => Err(Error::Config(format!(
                    "{path}: a stationary strategy takes either a pattern or a seed, not both"
                ))),
                (None, None) => Err(Error::Config(format!(
                    "{path}: a stationary strategy needs a pattern or a seed"
                ))),
            },
            "uniform" => Ok(NatureConfig::Uniform),
            "mirror" => Ok(NatureConfig::Mirror),
            "greedy_minimizer" => Ok(NatureConfig::GreedyMinimizer),
            other => Err(Error::Config(format!(
                "{path}.kind: unknown nature kind {other:?} (expected stationary, uniform, \
                 mirror, or greedy_minimizer)"
            ))),
        }
    }
}
