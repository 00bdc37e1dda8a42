//! naturelab — a simulation laboratory for repeated games against Nature.
//!
//! An agent repeatedly picks actions in a decision problem whose payoff
//! matrix it does not know, against an environment ("Nature") that picks
//! states arbitrarily — possibly adversarially — and without revealing
//! them before the agent moves. The library provides:
//!
//! * exact competitive-ratio and safety-level computations on payoff
//!   matrices ([`problem`]),
//! * agent strategies: a stochastic exploration/exploitation strategy
//!   whose long-run success fraction beats 1 − δ with probability 1 − δ
//!   after a computable stage bound, a payoff-only safety learner with an
//!   exact n_A − 1 guarantee, and a doubling composer ([`agent`],
//!   [`bounds`]),
//! * environment strategies including the mirror and masked-state
//!   adversaries behind the classic impossibility demos ([`nature`],
//!   [`demos`]),
//! * a deterministic, parallel Monte Carlo engine with seeded substreams
//!   ([`engine`], [`rng`]), and
//! * a JSON experiment-config layer and CSV/JSON exporters ([`config`],
//!   [`export`]).
//!
//! All payoff arithmetic is exact (`BigRational`), so argmin/argmax tie
//! sets and boundary comparisons like "ratio equals the competitive
//! ratio" are decided exactly, never by floating-point luck.

pub mod agent;
pub mod bounds;
pub mod config;
pub mod demos;
pub mod engine;
pub mod error;
pub mod export;
pub mod knowledge;
pub mod nature;
pub mod problem;
pub mod rational;
pub mod rng;
pub mod selftest;

pub use agent::{AgentConfig, AgentSession, Choice, Feedback, Monitoring};
pub use bounds::{theoretical_k, ComposerSchedule};
pub use config::{ExperimentConfig, RawExperimentConfig};
pub use engine::{
    estimate_delta_optimality, run_episode, EstimateSpec, ExperimentReport, StageRecord, Trace,
};
pub use error::{Error, Result};
pub use knowledge::{temporarily_good_set, KnowledgeMatrix};
pub use nature::{NatureConfig, NatureSession};
pub use problem::{CriterionResult, DecisionProblem};
pub use rational::{parse_decimal, parse_rational, Rat};
pub use rng::SeedPlan;
