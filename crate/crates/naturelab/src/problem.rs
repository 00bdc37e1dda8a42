//! One-shot decision problems and their exact worst-case criteria.
//!
//! A problem is a strictly positive payoff matrix with actions as rows and
//! states as columns. Two one-stage criteria are computed from the full
//! matrix: the competitive ratio (min over actions of the worst-case ratio
//! to the column optimum) and the safety level (max over actions of the
//! worst-case payoff). Both return the *complete* set of optimal actions,
//! which is only meaningful because payoffs are exact rationals.

use num::traits::Signed;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat_int, Rat};

/// A one-shot decision problem: strictly positive payoffs, rows = actions,
/// columns = states. Immutable after construction; safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionProblem {
    label: String,
    action_names: Vec<String>,
    state_names: Vec<String>,
    /// Row-major, `action_count × state_count`.
    payoffs: Vec<Rat>,
}

/// Value of a criterion together with every action that attains it,
/// in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionResult {
    pub value: Rat,
    pub optimal_actions: Vec<usize>,
}

impl DecisionProblem {
    pub fn new(
        label: impl Into<String>,
        action_names: Vec<String>,
        state_names: Vec<String>,
        payoffs: Vec<Rat>,
    ) -> Result<Self> {
        let n_a = action_names.len();
        let n_s = state_names.len();
        if n_a == 0 {
            return Err(Error::Config("problem needs at least one action".into()));
        }
        if n_s == 0 {
            return Err(Error::Config("problem needs at least one state".into()));
        }
        if payoffs.len() != n_a * n_s {
            return Err(Error::Config(format!(
                "payoff matrix has {} entries, expected {} ({} actions x {} states)",
                payoffs.len(),
                n_a * n_s,
                n_a,
                n_s
            )));
        }
        let problem = DecisionProblem {
            label: label.into(),
            action_names,
            state_names,
            payoffs,
        };
        for a in 0..n_a {
            for s in 0..n_s {
                if !problem.payoff(a, s).is_positive() {
                    return Err(Error::Config(format!(
                        "payoffs[{a}][{s}] (action {:?}, state {:?}) is {} but every payoff must be > 0",
                        problem.action_names[a],
                        problem.state_names[s],
                        format_rational(problem.payoff(a, s)),
                    )));
                }
            }
        }
        Ok(problem)
    }

    /// Convenience constructor from integer payoff rows.
    pub fn from_int_rows(label: &str, rows: &[&[i64]]) -> Result<Self> {
        let n_a = rows.len();
        let n_s = rows.first().map_or(0, |r| r.len());
        let payoffs = rows.iter().flat_map(|r| r.iter().map(|&v| rat_int(v))).collect();
        Self::new(
            label,
            (1..=n_a).map(|i| format!("a{i}")).collect(),
            (1..=n_s).map(|i| format!("s{i}")).collect(),
            payoffs,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn action_count(&self) -> usize {
        self.action_names.len()
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    /// n = max(n_A, n_S), the size parameter used by the stage bounds.
    pub fn n(&self) -> u32 {
        self.action_count().max(self.state_count()) as u32
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn payoff(&self, action: usize, state: usize) -> &Rat {
        &self.payoffs[action * self.state_count() + state]
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.action_count() {
            return Err(Error::Argument(format!(
                "action index {action} out of range (problem has {} actions)",
                self.action_count()
            )));
        }
        Ok(())
    }

    fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.state_count() {
            return Err(Error::Argument(format!(
                "state index {state} out of range (problem has {} states)",
                self.state_count()
            )));
        }
        Ok(())
    }

    /// Best payoff available in a state: the column maximum.
    pub fn max_payoff(&self, state: usize) -> Result<Rat> {
        self.check_state(state)?;
        Ok((0..self.action_count())
            .map(|a| self.payoff(a, state))
            .max()
            .expect("at least one action")
            .clone())
    }

    /// Worst-case-per-state ratio: column max divided by the cell. Always ≥ 1.
    pub fn true_ratio(&self, action: usize, state: usize) -> Result<Rat> {
        self.check_action(action)?;
        Ok(self.max_payoff(state)? / self.payoff(action, state))
    }

    /// Competitive ratio: min over actions of the row-wise max of
    /// `true_ratio`, with the full argmin set.
    pub fn competitive_ratio(&self) -> CriterionResult {
        let row_worst: Vec<Rat> = (0..self.action_count())
            .map(|a| {
                (0..self.state_count())
                    .map(|s| self.true_ratio(a, s).expect("indices in range"))
                    .max()
                    .expect("at least one state")
            })
            .collect();
        argopt(&row_worst, |x, y| x < y)
    }

    /// Safety level: max over actions of the row-wise minimum payoff,
    /// with the full argmax set.
    pub fn safety_level(&self) -> CriterionResult {
        let row_worst: Vec<Rat> = (0..self.action_count())
            .map(|a| {
                (0..self.state_count())
                    .map(|s| self.payoff(a, s))
                    .min()
                    .expect("at least one state")
                    .clone()
            })
            .collect();
        argopt(&row_worst, |x, y| x > y)
    }

    /// `success[a][s]` = does action `a` attain the competitive ratio in
    /// state `s`. Precomputed once per episode so the per-stage check is a
    /// table lookup instead of rational arithmetic.
    pub fn success_table(&self) -> Vec<Vec<bool>> {
        let cr = self.competitive_ratio().value;
        (0..self.action_count())
            .map(|a| {
                (0..self.state_count())
                    .map(|s| self.true_ratio(a, s).expect("indices in range") <= cr)
                    .collect()
            })
            .collect()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    /// Inline JSON form: `{label, actions, states, payoffs}` with payoff
    /// cells as exact decimal strings.
    pub fn to_value(&self) -> Value {
        serde_json::json!({
            "label": self.label,
            "actions": self.action_names,
            "states": self.state_names,
            "payoffs": (0..self.action_count())
                .map(|a| {
                    (0..self.state_count())
                        .map(|s| format_rational(self.payoff(a, s)))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        })
    }

    /// Parse an inline problem object. `path` is the config-field prefix
    /// used in diagnostics.
    pub fn from_value(v: &Value, path: &str) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config(format!("{path}: expected an object")))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "label" | "actions" | "states" | "payoffs") {
                return Err(Error::Config(format!("{path}.{key}: unknown field")));
            }
        }
        let label = match obj.get("label") {
            None => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::Config(format!("{path}.label: expected a string"))),
        };
        let names = |field: &str| -> Result<Vec<String>> {
            let arr = obj
                .get(field)
                .ok_or_else(|| Error::Config(format!("{path}.{field}: missing field")))?
                .as_array()
                .ok_or_else(|| Error::Config(format!("{path}.{field}: expected an array")))?;
            arr.iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::Config(format!("{path}.{field}[{i}]: expected a string")))
                })
                .collect()
        };
        let action_names = names("actions")?;
        let state_names = names("states")?;
        let rows = obj
            .get("payoffs")
            .ok_or_else(|| Error::Config(format!("{path}.payoffs: missing field")))?
            .as_array()
            .ok_or_else(|| Error::Config(format!("{path}.payoffs: expected an array of rows")))?;
        if rows.len() != action_names.len() {
            return Err(Error::Config(format!(
                "{path}.payoffs: {} rows but {} actions",
                rows.len(),
                action_names.len()
            )));
        }
        let mut payoffs = Vec::with_capacity(action_names.len() * state_names.len());
        for (a, row) in rows.iter().enumerate() {
            let cells = row.as_array().ok_or_else(|| {
                Error::Config(format!("{path}.payoffs[{a}]: expected an array"))
            })?;
            if cells.len() != state_names.len() {
                return Err(Error::Config(format!(
                    "{path}.payoffs[{a}]: {} entries but {} states",
                    cells.len(),
                    state_names.len()
                )));
            }
            for (s, cell) in cells.iter().enumerate() {
                let cell_path = || format!("{path}.payoffs[{a}][{s}]");
                let value = value_to_rational(cell)
                    .map_err(|e| Error::Config(format!("{}: {e}", cell_path())))?;
                if !value.is_positive() {
                    return Err(Error::Config(format!(
                        "{}: payoff {} for action {:?} in state {:?} must be > 0",
                        cell_path(),
                        format_rational(&value),
                        action_names[a],
                        state_names[s],
                    )));
                }
                payoffs.push(value);
            }
        }
        DecisionProblem::new(label, action_names, state_names, payoffs)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v, "problem")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("problem file {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }
}

/// Exact rational out of a JSON payoff cell. Numbers keep their decimal
/// text (the parser runs with arbitrary precision); strings may also be
/// explicit fractions like `"1/3"`.
pub fn value_to_rational(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Argument(format!(
            "expected a number or numeric string, got {other}"
        ))),
    }
}

fn argopt(values: &[Rat], better: impl Fn(&Rat, &Rat) -> bool) -> CriterionResult {
    let mut best = values[0].clone();
    for v in &values[1..] {
        if better(v, &best) {
            best = v.clone();
        }
    }
    let optimal_actions = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == best)
        .map(|(i, _)| i)
        .collect();
    CriterionResult {
        value: best,
        optimal_actions,
    }
}

// ── Built-in problem pairs used by the demos ──────────────────────────

/// 2×2 pair on which no deterministic agent can track the benchmark in
/// both tables at once against a state-mirroring adversary: the diagonal
/// play pairs carry identical payoffs in both problems but each is a
/// competitive-ratio success in exactly one of them.
pub fn mirror_trap_pair() -> (DecisionProblem, DecisionProblem) {
    let d1 = DecisionProblem::from_int_rows("mirror-trap-d1", &[&[1, 10], &[30, 2]])
        .expect("static matrix");
    let d2 = DecisionProblem::from_int_rows("mirror-trap-d2", &[&[1, 30], &[10, 2]])
        .expect("static matrix");
    (d1, d2)
}

/// 2×3 pair whose second rows are permutations of each other, so under
/// uniform state selection and payoff-only feedback the two problems are
/// indistinguishable — yet their competitive-ratio actions differ.
/// Requires a > 4b > 16c.
pub fn masked_state_pair(a: &Rat, b: &Rat, c: &Rat) -> Result<(DecisionProblem, DecisionProblem)> {
    let four = rat_int(4);
    if !(a > &(&four * b) && b > &(&four * c) && c.is_positive()) {
        return Err(Error::Argument(format!(
            "parameters must satisfy a > 4b > 16c > 0, got a={}, b={}, c={}",
            format_rational(a),
            format_rational(b),
            format_rational(c)
        )));
    }
    let two = rat_int(2);
    let top = vec![&two * a, &two * b, &two * c];
    let names = |label: &str, payoffs: Vec<Rat>| {
        DecisionProblem::new(
            label,
            vec!["a1".into(), "a2".into()],
            vec!["s1".into(), "s2".into(), "s3".into()],
            payoffs,
        )
    };
    let mut p1 = top.clone();
    p1.extend([a.clone(), b.clone(), c.clone()]);
    let mut p2 = top;
    p2.extend([b.clone(), c.clone(), a.clone()]);
    Ok((names("masked-state-d1", p1)?, names("masked-state-d2", p2)?))
}
