//! Experiment configuration: JSON schema, validation, resolution.
//!
//! A config file describes one experiment: the problem (inline or a path
//! to a problem file), the agent and Nature strategies, the monitoring
//! regime, the optimality parameters (delta, K, horizon), the Monte Carlo
//! set-up and output paths. Parsing is a hand-walked pass over the JSON
//! value so every diagnostic names the offending field, and numeric
//! fields keep their exact decimal values.

use std::path::{Path, PathBuf};

use num::traits::Signed;
use serde_json::{json, Map, Value};

use crate::agent::{AgentConfig, Monitoring};
use crate::bounds::theoretical_k;
use crate::error::{Error, Result};
use crate::nature::NatureConfig;
use crate::problem::DecisionProblem;
use crate::rational::{format_rational, parse_rational, rat_int, Rat};

/// How K was given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KSpec {
    Explicit(u64),
    /// Resolve from the stage-bound formula with the config's delta and
    /// the problem's n.
    Theoretical,
}

/// A parsed-but-unresolved config: the problem may still be a file path
/// and K may still be symbolic. No filesystem access happens here, so
/// this layer can safely chew on untrusted bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct RawExperimentConfig {
    pub problem: ProblemSource,
    pub agent: AgentConfig,
    pub nature: NatureConfig,
    pub monitoring: Monitoring,
    pub delta: Rat,
    pub k: KSpec,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: Option<u64>,
    pub confidence_level: f64,
    pub trace_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Inline(DecisionProblem),
    File(PathBuf),
}

/// A fully resolved experiment: problem inlined, K a concrete stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: DecisionProblem,
    pub agent: AgentConfig,
    pub nature: NatureConfig,
    pub monitoring: Monitoring,
    pub delta: Rat,
    pub k: u64,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: Option<u64>,
    pub confidence_level: f64,
    pub trace_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

const KNOWN_FIELDS: &[&str] = &[
    "problem",
    "agent",
    "nature",
    "monitoring",
    "delta",
    "k",
    "horizon",
    "replications",
    "master_seed",
    "confidence_level",
    "output",
];

fn get_u64(obj: &Map<String, Value>, field: &str) -> Result<Option<u64>> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{field}: expected a non-negative integer"))),
    }
}

fn numeric_rational(v: &Value, field: &str) -> Result<Rat> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        _ => Err(Error::Argument("expected a number".into())),
    }
    .map_err(|e| Error::Config(format!("{field}: {e}")))
}

impl RawExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("config: expected a JSON object".into()))?;
        for key in obj.keys() {
            if !KNOWN_FIELDS.contains(&key.as_str()) {
                return Err(Error::Config(format!("{key}: unknown field")));
            }
        }

        let problem = match obj.get("problem") {
            None => return Err(Error::Config("problem: missing field".into())),
            Some(Value::String(path)) => ProblemSource::File(PathBuf::from(path)),
            Some(inline) => ProblemSource::Inline(DecisionProblem::from_value(inline, "problem")?),
        };

        let agent = AgentConfig::from_value(
            obj.get("agent")
                .ok_or_else(|| Error::Config("agent: missing field".into()))?,
            "agent",
        )?;
        let nature = NatureConfig::from_value(
            obj.get("nature")
                .ok_or_else(|| Error::Config("nature: missing field".into()))?,
            "nature",
        )?;
        let monitoring = Monitoring::parse(
            obj.get("monitoring")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Config("monitoring: missing or not a string".into()))?,
        )?;

        let delta = numeric_rational(
            obj.get("delta")
                .ok_or_else(|| Error::Config("delta: missing field".into()))?,
            "delta",
        )?;
        if !delta.is_positive() || delta >= rat_int(1) {
            return Err(Error::Config(format!(
                "delta: must be in (0, 1), got {}",
                format_rational(&delta)
            )));
        }

        let k = match obj.get("k") {
            None => KSpec::Theoretical,
            Some(Value::String(s)) if s == "theoretical" => KSpec::Theoretical,
            Some(v) => KSpec::Explicit(v.as_u64().ok_or_else(|| {
                Error::Config(
                    "k: expected a non-negative integer or the string \"theoretical\"".into(),
                )
            })?),
        };

        let horizon = get_u64(obj, "horizon")?
            .ok_or_else(|| Error::Config("horizon: missing field".into()))?;
        if horizon == 0 {
            return Err(Error::Config("horizon: must be >= 1".into()));
        }
        let replications = get_u64(obj, "replications")?.unwrap_or(1);
        if replications == 0 {
            return Err(Error::Config("replications: must be >= 1".into()));
        }
        let master_seed = get_u64(obj, "master_seed")?;

        let confidence_level = match obj.get("confidence_level") {
            None => 0.95,
            Some(v) => {
                let r = numeric_rational(v, "confidence_level")?;
                let f = crate::rational::to_f64(&r);
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::Config(format!(
                        "confidence_level: must be in (0, 1), got {}",
                        format_rational(&r)
                    )));
                }
                f
            }
        };

        let (trace_csv, report_json) = match obj.get("output") {
            None => (None, None),
            Some(out) => {
                let out_obj = out
                    .as_object()
                    .ok_or_else(|| Error::Config("output: expected an object".into()))?;
                for key in out_obj.keys() {
                    if !matches!(key.as_str(), "trace_csv" | "report_json") {
                        return Err(Error::Config(format!("output.{key}: unknown field")));
                    }
                }
                let path_field = |field: &str| -> Result<Option<PathBuf>> {
                    match out_obj.get(field) {
                        None | Some(Value::Null) => Ok(None),
                        Some(Value::String(s)) => Ok(Some(PathBuf::from(s))),
                        Some(_) => Err(Error::Config(format!(
                            "output.{field}: expected a string path"
                        ))),
                    }
                };
                (path_field("trace_csv")?, path_field("report_json")?)
            }
        };

        Ok(RawExperimentConfig {
            problem,
            agent,
            nature,
            monitoring,
            delta,
            k,
            horizon,
            replications,
            master_seed,
            confidence_level,
            trace_csv,
            report_json,
        })
    }

    /// Load the problem (if it is a file reference, relative to
    /// `base_dir`), resolve symbolic K, and enforce cross-field
    /// invariants.
    pub fn resolve(self, base_dir: &Path) -> Result<ExperimentConfig> {
        let problem = match self.problem {
            ProblemSource::Inline(p) => p,
            ProblemSource::File(path) => {
                let full = if path.is_absolute() {
                    path
                } else {
                    base_dir.join(path)
                };
                DecisionProblem::load(&full)?
            }
        };
        let k = match self.k {
            KSpec::Explicit(k) => k,
            KSpec::Theoretical => theoretical_k(&self.delta, problem.n())?,
        };
        if k > self.horizon {
            return Err(Error::Config(format!(
                "horizon: {} is below the resolved K = {k}; the optimality event is empty",
                self.horizon
            )));
        }
        Ok(ExperimentConfig {
            problem,
            agent: self.agent,
            nature: self.nature,
            monitoring: self.monitoring,
            delta: self.delta,
            k,
            horizon: self.horizon,
            replications: self.replications,
            master_seed: self.master_seed,
            confidence_level: self.confidence_level,
            trace_csv: self.trace_csv,
            report_json: self.report_json,
        })
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
        let raw = RawExperimentConfig::from_json_str(&text)?;
        raw.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
    }

    /// Full JSON echo; parsing this back yields an equal config.
    pub fn to_value(&self) -> Value {
        let mut output = Map::new();
        if let Some(p) = &self.trace_csv {
            output.insert("trace_csv".into(), json!(p.display().to_string()));
        }
        if let Some(p) = &self.report_json {
            output.insert("report_json".into(), json!(p.display().to_string()));
        }
        let mut obj = Map::new();
        obj.insert("problem".into(), self.problem.to_value());
        obj.insert("agent".into(), self.agent.to_value());
        obj.insert("nature".into(), self.nature.to_value());
        obj.insert("monitoring".into(), json!(self.monitoring.as_str()));
        obj.insert("delta".into(), json!(format_rational(&self.delta)));
        obj.insert("k".into(), json!(self.k));
        obj.insert("horizon".into(), json!(self.horizon));
        obj.insert("replications".into(), json!(self.replications));
        if let Some(seed) = self.master_seed {
            obj.insert("master_seed".into(), json!(seed));
        }
        obj.insert("confidence_level".into(), json!(self.confidence_level));
        if !output.is_empty() {
            obj.insert("output".into(), Value::Object(output));
        }
        Value::Object(obj)
    }

    /// Parse an echo produced by [`Self::to_value`].
    pub fn from_value(v: &Value) -> Result<Self> {
        RawExperimentConfig::from_value(v)?.resolve(Path::new("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn minimal_config(k: &str) -> String {
        format!(
            r#"{{
              "problem": {{
                "label": "pair-1",
                "actions": ["a1", "a2"],
                "states": ["s1", "s2"],
                "payoffs": [[1, 10], [30, 2]]
              }},
              "agent": {{"kind": "cr_explorer", "delta": 0.5}},
              "nature": {{"kind": "uniform"}},
              "monitoring": "perfect",
              "delta": 0.5,
              "k": {k},
              "horizon": 8000,
              "replications": 4,
              "master_seed": 1
            }}"#
        )
    }

    #[test]
    fn theoretical_k_resolves() {
        let raw = RawExperimentConfig::from_json_str(&minimal_config("\"theoretical\"")).unwrap();
        let cfg = raw.resolve(Path::new(".")).unwrap();
        assert_eq!(cfg.k, 3906);
        assert_eq!(cfg.delta, rat(1, 2));
        assert_eq!(cfg.confidence_level, 0.95);
    }

    #[test]
    fn explicit_k_survives() {
        let cfg = RawExperimentConfig::from_json_str(&minimal_config("123"))
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        assert_eq!(cfg.k, 123);
    }

    #[test]
    fn delta_out_of_range_names_field() {
        let text = minimal_config("10").replace("\"delta\": 0.5", "\"delta\": 1.5");
        let err = RawExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("delta"), "was {err}");
    }

    #[test]
    fn zero_payoff_names_cell() {
        let text = minimal_config("10").replace("[30, 2]", "[0, 2]");
        let err = RawExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("payoffs[1][0]"), "was {err}");
    }

    #[test]
    fn horizon_below_k_rejected_after_resolution() {
        let text = minimal_config("\"theoretical\"").replace("8000", "100");
        let err = RawExperimentConfig::from_json_str(&text)
            .unwrap()
            .resolve(Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(err.contains("horizon"), "was {err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = minimal_config("10").replace("\"replications\": 4", "\"reps\": 4");
        let err = RawExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("reps"), "was {err}");
    }

    #[test]
    fn echo_roundtrip() {
        let cfg = RawExperimentConfig::from_json_str(&minimal_config("\"theoretical\""))
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        let echoed = ExperimentConfig::from_value(&cfg.to_value()).unwrap();
        assert_eq!(cfg, echoed);
    }

    #[test]
    fn file_problem_reference_resolves() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("prob.json"),
            r#"{"label":"f","actions":["a1"],"states":["s1"],"payoffs":[[2.5]]}"#,
        )
        .unwrap();
        let mut v: Value = serde_json::from_str(&minimal_config("5")).unwrap();
        v["problem"] = json!("prob.json");
        let raw = RawExperimentConfig::from_value(&v).unwrap();
        let cfg = raw.resolve(dir.path()).unwrap();
        assert_eq!(cfg.problem.label(), "f");
        assert_eq!(cfg.problem.payoff(0, 0), &rat(5, 2));
    }

    #[test]
    fn missing_problem_file_is_config_error() {
        let mut v: Value = serde_json::from_str(&minimal_config("5")).unwrap();
        v["problem"] = json!("does-not-exist.json");
        let err = RawExperimentConfig::from_value(&v)
            .unwrap()
            .resolve(Path::new("/nonexistent-base"))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
