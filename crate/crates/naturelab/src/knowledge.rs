//! The agent's partial view of the payoff matrix.
//!
//! Cells start unknown and are filled in from perfect-monitoring
//! observations. A cell never changes once known; a re-observation with a
//! different value is an integrity violation. From the partial matrix the
//! agent derives an empirical ratio matrix — unknown cells optimistically
//! count as ratio 1 — and the set of actions minimizing its row-wise max.
//! That optimistic default is what makes entirely unobserved actions
//! competitive candidates, i.e. it is the built-in exploration pull.

use crate::error::{Error, Result};
use crate::rational::{format_rational, rat_int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeMatrix {
    n_actions: usize,
    n_states: usize,
    entries: Vec<Option<Rat>>,
    /// Stage counter T; incremented per observation.
    stage: u64,
    /// Number of known cells; monotone, and a cheap change detector.
    known: usize,
}

impl KnowledgeMatrix {
    pub fn new(n_actions: usize, n_states: usize) -> Self {
        KnowledgeMatrix {
            n_actions,
            n_states,
            entries: vec![None; n_actions * n_states],
            stage: 0,
            known: 0,
        }
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    /// Monotone counter that changes exactly when a new cell is learned.
    pub fn version(&self) -> usize {
        self.known
    }

    pub fn get(&self, action: usize, state: usize) -> Option<&Rat> {
        self.entries[action * self.n_states + state].as_ref()
    }

    /// Record a perfect-monitoring observation. Idempotent on identical
    /// re-observations; a conflicting value for a known cell is an
    /// integrity error.
    pub fn observe(&mut self, action: usize, state: usize, payoff: &Rat) -> Result<()> {
        let slot = &mut self.entries[action * self.n_states + state];
        match slot {
            Some(existing) if existing != payoff => {
                return Err(Error::Integrity(format!(
                    "cell (action {action}, state {state}) was observed as {} but is already known as {}; \
                     the environment is not a repeated game",
                    format_rational(payoff),
                    format_rational(existing),
                )));
            }
            Some(_) => {}
            None => {
                *slot = Some(payoff.clone());
                self.known += 1;
            }
        }
        self.stage += 1;
        Ok(())
    }

    /// Empirical ratio matrix: 1 for unknown cells; otherwise the max
    /// known payoff in the column divided by the cell. Every entry ≥ 1.
    pub fn empirical_ratio_matrix(&self) -> Vec<Rat> {
        let one = rat_int(1);
        let mut out = vec![one.clone(); self.n_actions * self.n_states];
        for s in 0..self.n_states {
            let col_max = (0..self.n_actions)
                .filter_map(|a| self.get(a, s))
                .max()
                .cloned();
            if let Some(col_max) = col_max {
                for a in 0..self.n_actions {
                    if let Some(u) = self.get(a, s) {
                        out[a * self.n_states + s] = &col_max / u;
                    }
                }
            }
        }
        out
    }
}

/// Full argmin set of the row-wise maximum of an empirical ratio matrix,
/// ascending. Never empty.
pub fn temporarily_good_set(ratios: &[Rat], n_actions: usize, n_states: usize) -> Vec<usize> {
    assert_eq!(ratios.len(), n_actions * n_states);
    let row_max = |a: usize| {
        (0..n_states)
            .map(|s| &ratios[a * n_states + s])
            .max()
            .expect("at least one state")
    };
    let best = (0..n_actions).map(row_max).min().expect("at least one action");
    (0..n_actions).filter(|&a| row_max(a) == best).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::mirror_trap_pair;
    use proptest::prelude::*;

    fn fill(k: &mut KnowledgeMatrix, p: &crate::problem::DecisionProblem) {
        for a in 0..p.action_count() {
            for s in 0..p.state_count() {
                k.observe(a, s, p.payoff(a, s)).unwrap();
            }
        }
    }

    #[test]
    fn observation_fills_one_cell() {
        let (d1, _) = mirror_trap_pair();
        let mut k = KnowledgeMatrix::new(2, 2);
        k.observe(1, 0, d1.payoff(1, 0)).unwrap();
        assert_eq!(k.get(1, 0), Some(&rat_int(30)));
        assert_eq!(k.version(), 1);
        assert_eq!(k.stage(), 1);
        assert!(k.get(0, 0).is_none());
    }

    #[test]
    fn identical_reobservation_is_idempotent() {
        let mut k = KnowledgeMatrix::new(2, 2);
        k.observe(0, 0, &rat_int(7)).unwrap();
        k.observe(0, 0, &rat_int(7)).unwrap();
        assert_eq!(k.version(), 1);
        assert_eq!(k.stage(), 2);
    }

    #[test]
    fn conflicting_reobservation_is_integrity_error() {
        let mut k = KnowledgeMatrix::new(2, 2);
        k.observe(0, 0, &rat_int(7)).unwrap();
        let err = k.observe(0, 0, &rat_int(8)).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn unknown_cells_give_all_ones() {
        let k = KnowledgeMatrix::new(2, 2);
        assert!(k.empirical_ratio_matrix().iter().all(|r| *r == rat_int(1)));
    }

    #[test]
    fn single_known_cell_stays_ratio_one() {
        let (d1, _) = mirror_trap_pair();
        let mut k = KnowledgeMatrix::new(2, 2);
        k.observe(1, 0, d1.payoff(1, 0)).unwrap();
        // only a2 known in column s1, so its own ratio is 1
        assert!(k.empirical_ratio_matrix().iter().all(|r| *r == rat_int(1)));
    }

    #[test]
    fn fully_known_matches_true_ratios() {
        let (d1, d2) = mirror_trap_pair();
        for p in [&d1, &d2] {
            let mut k = KnowledgeMatrix::new(2, 2);
            fill(&mut k, p);
            let c = k.empirical_ratio_matrix();
            for a in 0..2 {
                for s in 0..2 {
                    assert_eq!(c[a * 2 + s], p.true_ratio(a, s).unwrap());
                }
            }
        }
    }

    #[test]
    fn good_set_on_builtin_pair() {
        let (d1, d2) = mirror_trap_pair();
        let all_unknown = KnowledgeMatrix::new(2, 2).empirical_ratio_matrix();
        assert_eq!(temporarily_good_set(&all_unknown, 2, 2), vec![0, 1]);

        for (p, expected) in [(&d1, vec![1usize]), (&d2, vec![0usize])] {
            let mut k = KnowledgeMatrix::new(2, 2);
            fill(&mut k, p);
            assert_eq!(
                temporarily_good_set(&k.empirical_ratio_matrix(), 2, 2),
                expected
            );
        }
    }

    fn arb_problem() -> impl Strategy<Value = crate::problem::DecisionProblem> {
        (1usize..5, 1usize..5).prop_flat_map(|(n_a, n_s)| {
            proptest::collection::vec(1i64..50, n_a * n_s).prop_map(move |cells| {
                crate::problem::DecisionProblem::new(
                    "random",
                    (0..n_a).map(|i| format!("a{i}")).collect(),
                    (0..n_s).map(|i| format!("s{i}")).collect(),
                    cells.iter().map(|&v| rat_int(v)).collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        // Empirical ratios never exceed the truth and never shrink as
        // knowledge grows; a fully known matrix reproduces the truth and
        // the good set converges to the true CR action set.
        #[test]
        fn soundness_and_monotonicity(
            p in arb_problem(),
            order_seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n_a = p.action_count();
            let n_s = p.state_count();
            let mut cells: Vec<(usize, usize)> =
                (0..n_a).flat_map(|a| (0..n_s).map(move |s| (a, s))).collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(order_seed);
            cells.shuffle(&mut rng);

            let mut k = KnowledgeMatrix::new(n_a, n_s);
            let mut prev = k.empirical_ratio_matrix();
            for &(a, s) in &cells {
                k.observe(a, s, p.payoff(a, s)).unwrap();
                let cur = k.empirical_ratio_matrix();
                for a2 in 0..n_a {
                    for s2 in 0..n_s {
                        let i = a2 * n_s + s2;
                        prop_assert!(cur[i] >= rat_int(1));
                        prop_assert!(cur[i] >= prev[i], "ratios must not shrink");
                        prop_assert!(cur[i] <= p.true_ratio(a2, s2).unwrap());
                    }
                }
                prop_assert!(!temporarily_good_set(&cur, n_a, n_s).is_empty());
                prev = cur;
            }
            prop_assert_eq!(
                temporarily_good_set(&prev, n_a, n_s),
                p.competitive_ratio().optimal_actions
            );
        }
    }
}
