//! Agent-side strategies.
//!
//! * [`CrExplorer`] — the stochastic exploration/exploitation strategy:
//!   each stage it refreshes the temporarily-good set from its knowledge,
//!   flips a coin with P(exploit) = 1 − δ/8, and plays uniformly from the
//!   good set (exploit) or from all actions (explore).
//! * greedy-deterministic — the explorer with the coin forced to exploit
//!   and uniform draws replaced by lowest-index picks; the canonical pure
//!   strategy for the mirror-adversary demo.
//! * [`SafetyLearner`] — payoff-only learner that round-robins once
//!   through the actions and then plays the action with the best observed
//!   worst case. It pays below the safety level at most n_A − 1 times,
//!   ever, on any state sequence.
//! * [`Composer`] — runs fresh explorers with halving deltas over a
//!   doubling block schedule.
//! * fixed / uniform-random / blind-explorer — stress agents for the
//!   imperfect-monitoring demos.

use rand::distr::{Bernoulli, Distribution};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bounds::ComposerSchedule;
use crate::error::{Error, Result};
use crate::knowledge::{temporarily_good_set, KnowledgeMatrix};
use crate::problem::DecisionProblem;
use crate::rational::{format_rational, parse_rational, rat_int, to_f64, Rat};

/// Feedback structure of the repeated game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitoring {
    /// The realized state is revealed alongside the payoff.
    Perfect,
    /// Only the payoff is revealed.
    Imperfect,
}

impl Monitoring {
    pub fn as_str(self) -> &'static str {
        match self {
            Monitoring::Perfect => "perfect",
            Monitoring::Imperfect => "imperfect",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Monitoring::Perfect),
            "imperfect" => Ok(Monitoring::Imperfect),
            other => Err(Error::Config(format!(
                "monitoring: expected \"perfect\" or \"imperfect\", got {other:?}"
            ))),
        }
    }
}

/// Feedback shape an agent is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitoringReq {
    PerfectOnly,
    ImperfectOnly,
    Either,
}

impl MonitoringReq {
    pub fn accepts(self, m: Monitoring) -> bool {
        match self {
            MonitoringReq::PerfectOnly => m == Monitoring::Perfect,
            MonitoringReq::ImperfectOnly => m == Monitoring::Imperfect,
            MonitoringReq::Either => true,
        }
    }
}

/// What the agent sees after a stage.
#[derive(Debug, Clone)]
pub enum Feedback {
    Perfect { state: usize, payoff: Rat },
    Imperfect { payoff: Rat },
}

/// A stage decision: the action plus the exploit/explore coin where the
/// strategy has one (`true` = exploit the good set).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub action: usize,
    pub coin: Option<bool>,
}

/// A single-episode stateful strategy. One session per replication;
/// sessions are never shared across threads.
pub trait AgentSession: Send {
    fn required_monitoring(&self) -> MonitoringReq;

    /// Pure strategies are deterministic functions of the observed
    /// history; only these may face the mirror adversary.
    fn is_pure(&self) -> bool {
        false
    }

    fn choose(&mut self, rng: &mut ChaCha8Rng) -> Choice;

    fn observe(&mut self, action: usize, feedback: &Feedback) -> Result<()>;
}

// ── Competitive-ratio explorer ────────────────────────────────────────

/// Action-selection flavor of the explorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExplorerMode {
    /// Coin with P(exploit) = 1 − δ/8; uniform draws.
    Stochastic,
    /// Coin forced to exploit; lowest-index picks. Pure.
    Deterministic,
}

pub struct CrExplorer {
    knowledge: KnowledgeMatrix,
    delta: Rat,
    /// 1/M = δ/8, kept exact; the coin uses its nearest f64.
    exploration_mass: Rat,
    coin: Bernoulli,
    mode: ExplorerMode,
    /// Cached good set, refreshed when the knowledge version moves.
    good_set: Vec<usize>,
    good_version: Option<usize>,
    n_actions: usize,
    n_states: usize,
    /// When false the session ignores state information entirely
    /// (imperfect-monitoring stress variant).
    update_knowledge: bool,
}

impl CrExplorer {
    pub fn new(n_actions: usize, n_states: usize, delta: &Rat) -> Result<Self> {
        Self::build(n_actions, n_states, delta, ExplorerMode::Stochastic, true)
    }

    /// The explorer with the coin forced to exploit and uniform draws
    /// replaced by lowest-index selection.
    pub fn greedy_deterministic(n_actions: usize, n_states: usize, delta: &Rat) -> Result<Self> {
        Self::build(n_actions, n_states, delta, ExplorerMode::Deterministic, true)
    }

    /// Explorer that never updates knowledge (payoff-only feedback).
    pub fn blind(n_actions: usize, n_states: usize, delta: &Rat) -> Result<Self> {
        Self::build(n_actions, n_states, delta, ExplorerMode::Stochastic, false)
    }

    fn build(
        n_actions: usize,
        n_states: usize,
        delta: &Rat,
        mode: ExplorerMode,
        update_knowledge: bool,
    ) -> Result<Self> {
        if !num::traits::Signed::is_positive(delta) || delta >= &rat_int(1) {
            return Err(Error::Argument(format!(
                "explorer delta must be in (0, 1), got {}",
                format_rational(delta)
            )));
        }
        let exploration_mass = delta / rat_int(8);
        let p_exploit = 1.0 - to_f64(&exploration_mass);
        Ok(CrExplorer {
            knowledge: KnowledgeMatrix::new(n_actions, n_states),
            delta: delta.clone(),
            exploration_mass,
            coin: Bernoulli::new(p_exploit)
                .map_err(|e| Error::Argument(format!("bad coin probability: {e}")))?,
            mode,
            good_set: (0..n_actions).collect(),
            good_version: None,
            n_actions,
            n_states,
            update_knowledge,
        })
    }

    pub fn delta(&self) -> &Rat {
        &self.delta
    }

    pub fn exploration_mass(&self) -> &Rat {
        &self.exploration_mass
    }

    pub fn knowledge(&self) -> &KnowledgeMatrix {
        &self.knowledge
    }

    /// Recompute the good set if any cell was learned since last time.
    /// The set is a pure function of the knowledge matrix, so skipping
    /// recomputation on unchanged knowledge is exact, not approximate.
    fn refresh_good_set(&mut self) {
        if self.good_version != Some(self.knowledge.version()) {
            let ratios = self.knowledge.empirical_ratio_matrix();
            self.good_set = temporarily_good_set(&ratios, self.n_actions, self.n_states);
            self.good_version = Some(self.knowledge.version());
        }
    }

    pub fn good_set(&mut self) -> &[usize] {
        self.refresh_good_set();
        &self.good_set
    }
}

impl AgentSession for CrExplorer {
    fn required_monitoring(&self) -> MonitoringReq {
        if self.update_knowledge {
            MonitoringReq::PerfectOnly
        } else {
            MonitoringReq::ImperfectOnly
        }
    }

    fn is_pure(&self) -> bool {
        self.mode == ExplorerMode::Deterministic
    }

    fn choose(&mut self, rng: &mut ChaCha8Rng) -> Choice {
        self.refresh_good_set();
        match self.mode {
            ExplorerMode::Deterministic => Choice {
                action: self.good_set[0],
                coin: Some(true),
            },
            ExplorerMode::Stochastic => {
                let exploit = self.coin.sample(rng);
                let action = if exploit {
                    self.good_set[rng.random_range(0..self.good_set.len())]
                } else {
                    rng.random_range(0..self.n_actions)
                };
                Choice {
                    action,
                    coin: Some(exploit),
                }
            }
        }
    }

    fn observe(&mut self, action: usize, feedback: &Feedback) -> Result<()> {
        match feedback {
            Feedback::Perfect { state, payoff } if self.update_knowledge => {
                self.knowledge.observe(action, *state, payoff)
            }
            _ => Ok(()),
        }
    }
}

// ── Safety-level learner ──────────────────────────────────────────────

/// Next action for the payoff-only safety learner given the observed
/// history: round-robin through the first `n_actions` stages, then the
/// action with the best observed minimum payoff, lowest index on ties.
pub fn safety_learner_step(history: &[(usize, Rat)], n_actions: usize) -> usize {
    let t = history.len();
    if t < n_actions {
        return t;
    }
    let mut minima: Vec<Option<&Rat>> = vec![None; n_actions];
    for (a, u) in history {
        let slot = &mut minima[*a];
        if slot.map_or(true, |m| u < m) {
            *slot = Some(u);
        }
    }
    let mut best = 0usize;
    for a in 1..n_actions {
        // every action was visited during the round-robin prefix
        if minima[a] > minima[best] {
            best = a;
        }
    }
    best
}

pub struct SafetyLearner {
    n_actions: usize,
    stage: usize,
    /// Observed worst payoff per action.
    minima: Vec<Option<Rat>>,
}

impl SafetyLearner {
    pub fn new(n_actions: usize) -> Self {
        SafetyLearner {
            n_actions,
            stage: 0,
            minima: vec![None; n_actions],
        }
    }
}

impl AgentSession for SafetyLearner {
    fn required_monitoring(&self) -> MonitoringReq {
        MonitoringReq::Either
    }

    fn is_pure(&self) -> bool {
        true
    }

    fn choose(&mut self, _rng: &mut ChaCha8Rng) -> Choice {
        let action = if self.stage < self.n_actions {
            self.stage
        } else {
            let mut best = 0usize;
            for a in 1..self.n_actions {
                if self.minima[a] > self.minima[best] {
                    best = a;
                }
            }
            best
        };
        Choice { action, coin: None }
    }

    fn observe(&mut self, action: usize, feedback: &Feedback) -> Result<()> {
        let payoff = match feedback {
            Feedback::Perfect { payoff, .. } | Feedback::Imperfect { payoff } => payoff,
        };
        let slot = &mut self.minima[action];
        if slot.as_ref().map_or(true, |m| payoff < m) {
            *slot = Some(payoff.clone());
        }
        self.stage += 1;
        Ok(())
    }
}

// ── Composer ──────────────────────────────────────────────────────────

/// Runs a fresh explorer per schedule block; each block's explorer starts
/// with empty knowledge and parameter δ_m/2.
pub struct Composer {
    schedule: ComposerSchedule,
    n_actions: usize,
    n_states: usize,
    stage: u64,
    current_block: usize,
    inner: CrExplorer,
}

impl Composer {
    pub fn new(
        n_actions: usize,
        n_states: usize,
        delta_initial: &Rat,
        horizon_blocks: usize,
    ) -> Result<Self> {
        let n = n_actions.max(n_states) as u32;
        let schedule = ComposerSchedule::new(delta_initial, horizon_blocks.max(1), n)?;
        let inner = CrExplorer::new(n_actions, n_states, &schedule.explorer_delta(0))?;
        Ok(Composer {
            schedule,
            n_actions,
            n_states,
            stage: 0,
            current_block: 0,
            inner,
        })
    }

    pub fn schedule(&self) -> &ComposerSchedule {
        &self.schedule
    }

    fn roll_block(&mut self) -> Result<()> {
        let block = self.schedule.block_of_stage(self.stage + 1)?;
        if block != self.current_block {
            self.current_block = block;
            self.inner = CrExplorer::new(
                self.n_actions,
                self.n_states,
                &self.schedule.explorer_delta(block),
            )?;
        }
        Ok(())
    }
}

impl AgentSession for Composer {
    fn required_monitoring(&self) -> MonitoringReq {
        MonitoringReq::PerfectOnly
    }

    fn choose(&mut self, rng: &mut ChaCha8Rng) -> Choice {
        self.roll_block().expect("schedule extension cannot fail mid-run");
        self.inner.choose(rng)
    }

    fn observe(&mut self, action: usize, feedback: &Feedback) -> Result<()> {
        self.stage += 1;
        self.inner.observe(action, feedback)
    }
}

// ── Stress agents ─────────────────────────────────────────────────────

/// Always plays one action.
pub struct FixedAction {
    action: usize,
}

impl FixedAction {
    pub fn new(action: usize, n_actions: usize) -> Result<Self> {
        if action >= n_actions {
            return Err(Error::Config(format!(
                "fixed action index {action} out of range ({n_actions} actions)"
            )));
        }
        Ok(FixedAction { action })
    }
}

impl AgentSession for FixedAction {
    fn required_monitoring(&self) -> MonitoringReq {
        MonitoringReq::Either
    }

    fn is_pure(&self) -> bool {
        true
    }

    fn choose(&mut self, _rng: &mut ChaCha8Rng) -> Choice {
        Choice {
            action: self.action,
            coin: None,
        }
    }

    fn observe(&mut self, _action: usize, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }
}

/// Uniform over all actions every stage.
pub struct UniformRandomAgent {
    n_actions: usize,
}

impl UniformRandomAgent {
    pub fn new(n_actions: usize) -> Self {
        UniformRandomAgent { n_actions }
    }
}

impl AgentSession for UniformRandomAgent {
    fn required_monitoring(&self) -> MonitoringReq {
        MonitoringReq::Either
    }

    fn choose(&mut self, rng: &mut ChaCha8Rng) -> Choice {
        Choice {
            action: rng.random_range(0..self.n_actions),
            coin: None,
        }
    }

    fn observe(&mut self, _action: usize, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }
}

// ── Configuration ─────────────────────────────────────────────────────

/// Declarative agent description, as embedded in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentConfig {
    CrExplorer { delta: Rat },
    GreedyDeterministic { delta: Rat },
    CrExplorerBlind { delta: Rat },
    SafetyLearner,
    Composer { delta_initial: Rat, blocks: usize },
    Fixed { action: usize },
    UniformRandom,
}

impl AgentConfig {
    /// Feedback shape the configured agent consumes, without building it.
    pub fn required_monitoring(&self) -> MonitoringReq {
        match self {
            AgentConfig::CrExplorer { .. }
            | AgentConfig::GreedyDeterministic { .. }
            | AgentConfig::Composer { .. } => MonitoringReq::PerfectOnly,
            AgentConfig::CrExplorerBlind { .. } => MonitoringReq::ImperfectOnly,
            AgentConfig::SafetyLearner | AgentConfig::Fixed { .. } | AgentConfig::UniformRandom => {
                MonitoringReq::Either
            }
        }
    }

    /// Whether the configured agent is a deterministic function of its
    /// observations.
    pub fn is_pure(&self) -> bool {
        matches!(
            self,
            AgentConfig::GreedyDeterministic { .. }
                | AgentConfig::SafetyLearner
                | AgentConfig::Fixed { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AgentConfig::CrExplorer { .. } => "cr_explorer",
            AgentConfig::GreedyDeterministic { .. } => "greedy_deterministic",
            AgentConfig::CrExplorerBlind { .. } => "cr_explorer_blind",
            AgentConfig::SafetyLearner => "safety_learner",
            AgentConfig::Composer { .. } => "composer",
            AgentConfig::Fixed { .. } => "fixed",
            AgentConfig::UniformRandom => "uniform_random",
        }
    }

    /// Build a fresh session for one episode.
    pub fn build(&self, problem: &DecisionProblem) -> Result<Box<dyn AgentSession>> {
        let n_a = problem.action_count();
        let n_s = problem.state_count();
        Ok(match self {
            AgentConfig::CrExplorer { delta } => Box::new(CrExplorer::new(n_a, n_s, delta)?),
            AgentConfig::GreedyDeterministic { delta } => {
                Box::new(CrExplorer::greedy_deterministic(n_a, n_s, delta)?)
            }
            AgentConfig::CrExplorerBlind { delta } => Box::new(CrExplorer::blind(n_a, n_s, delta)?),
            AgentConfig::SafetyLearner => Box::new(SafetyLearner::new(n_a)),
            AgentConfig::Composer {
                delta_initial,
                blocks,
            } => Box::new(Composer::new(n_a, n_s, delta_initial, *blocks)?),
            AgentConfig::Fixed { action } => Box::new(FixedAction::new(*action, n_a)?),
            AgentConfig::UniformRandom => Box::new(UniformRandomAgent::new(n_a)),
        })
    }

    pub fn to_value(&self) -> Value {
        match self {
            AgentConfig::CrExplorer { delta } => {
                json!({"kind": "cr_explorer", "delta": format_rational(delta)})
            }
            AgentConfig::GreedyDeterministic { delta } => {
                json!({"kind": "greedy_deterministic", "delta": format_rational(delta)})
            }
            AgentConfig::CrExplorerBlind { delta } => {
                json!({"kind": "cr_explorer_blind", "delta": format_rational(delta)})
            }
            AgentConfig::SafetyLearner => json!({"kind": "safety_learner"}),
            AgentConfig::Composer {
                delta_initial,
                blocks,
            } => json!({
                "kind": "composer",
                "delta_initial": format_rational(delta_initial),
                "blocks": blocks,
            }),
            AgentConfig::Fixed { action } => json!({"kind": "fixed", "action": action}),
            AgentConfig::UniformRandom => json!({"kind": "uniform_random"}),
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
        let delta_field = |field: &str| -> Result<Rat> {
            let raw = obj
                .get(field)
                .ok_or_else(|| Error::Config(format!("{path}.{field}: missing field")))?;
            let value = match raw {
                Value::Number(n) => parse_rational(&n.to_string()),
                Value::String(s) => parse_rational(s),
                _ => Err(Error::Argument("expected a number".into())),
            }
            .map_err(|e| Error::Config(format!("{path}.{field}: {e}")))?;
            if !num::traits::Signed::is_positive(&value) || value >= rat_int(1) {
                return Err(Error::Config(format!(
                    "{path}.{field}: must be in (0, 1), got {}",
                    format_rational(&value)
                )));
            }
            Ok(value)
        };
        match kind {
            "cr_explorer" => Ok(AgentConfig::CrExplorer {
                delta: delta_field("delta")?,
            }),
            "greedy_deterministic" => Ok(AgentConfig::GreedyDeterministic {
                delta: delta_field("delta")?,
            }),
            "cr_explorer_blind" => Ok(AgentConfig::CrExplorerBlind {
                delta: delta_field("delta")?,
            }),
            "safety_learner" => Ok(AgentConfig::SafetyLearner),
            "composer" => {
                let blocks = match obj.get("blocks") {
                    None => 1,
                    Some(v) => v.as_u64().ok_or_else(|| {
                        Error::Config(format!("{path}.blocks: expected a positive integer"))
                    })? as usize,
                };
                Ok(AgentConfig::Composer {
                    delta_initial: delta_field("delta_initial")?,
                    blocks: blocks.max(1),
                })
            }
            "fixed" => {
                let action = obj
                    .get("action")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| {
                        Error::Config(format!("{path}.action: missing or not an integer"))
                    })?;
                Ok(AgentConfig::Fixed {
                    action: action as usize,
                })
            }
            "uniform_random" => Ok(AgentConfig::UniformRandom),
            other => Err(Error::Config(format!(
                "{path}.kind: unknown agent kind {other:?} (expected cr_explorer, \
                 greedy_deterministic, cr_explorer_blind, safety_learner, composer, \
                 fixed, or uniform_random)"
            ))),
        }
    }
}
