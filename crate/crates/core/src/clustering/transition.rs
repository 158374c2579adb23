use serde::{Deserialize, Serialize};

use super::DayState;

/// Day-to-day transition probabilities over the states `1..=k` and `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub k: usize,
    /// `(k+1) × (k+1)`, rows indexed by current state, `U` last.
    pub probs: Vec<Vec<f64>>,
    /// Rows with no observed outgoing transition; these are set uniform.
    pub empty_rows: Vec<bool>,
    pub counts: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    /// Counts transitions between consecutive elements of each sequence.
    pub fn from_sequences(k: usize, sequences: &[Vec<DayState>]) -> Self {
        Self::from_pairs(
            k,
            sequences
                .iter()
                .flat_map(|s| s.windows(2).map(|w| (w[0], w[1]))),
        )
    }

    pub fn from_pairs(k: usize, pairs: impl IntoIterator<Item = (DayState, DayState)>) -> Self {
        let n = k + 1;
        let mut counts = vec![vec![0u64; n]; n];
        for (a, b) in pairs {
            counts[a.state_index(k)][b.state_index(k)] += 1;
        }
        let mut empty_rows = vec![false; n];
        let probs = counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    empty_rows[i] = true;
                    vec![1.0 / n as f64; n]
                } else {
                    row.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect();
        Self {
            k,
            probs,
            empty_rows,
            counts,
        }
    }

    pub fn prob(&self, from: DayState, to: DayState) -> f64 {
        self.probs[from.state_index(self.k)][to.state_index(self.k)]
    }

    /// State names in row/column order.
    pub fn state_names(&self) -> Vec<String> {
        (1..=self.k)
            .map(|l| l.to_string())
            .chain(std::iter::once("U".to_string()))
            .collect()
    }
}

/// Transition matrix from per-vehicle, day-ordered labels.
pub fn transition_matrix(k: usize, sequences: &[Vec<DayState>]) -> TransitionMatrix {
    TransitionMatrix::from_sequences(k, sequences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Cluster;
    use proptest::prelude::*;

    fn c(l: usize) -> DayState {
        DayState::Used(Cluster::from_label(l))
    }

    #[test]
    fn constant_sequence() {
        let m = transition_matrix(3, &[vec![c(1), c(1), c(1)]]);
        assert_eq!(m.probs[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert!(m.empty_rows[1] && m.empty_rows[2] && m.empty_rows[3]);
        assert_eq!(m.probs[3], vec![0.25; 4]);
    }

    #[test]
    fn split_row() {
        let m = transition_matrix(3, &[vec![c(1), c(2)], vec![c(1), DayState::Unused]]);
        assert_eq!(m.probs[0], vec![0.0, 0.5, 0.0, 0.5]);
        assert_eq!(m.prob(c(1), DayState::Unused), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rows_are_stochastic(
            k in 1usize..6,
            seqs in prop::collection::vec(prop::collection::vec(0usize..7, 0..20), 0..8),
        ) {
            let seqs: Vec<Vec<DayState>> = seqs
                .into_iter()
                .map(|s| s.into_iter().map(|x| if x % (k + 1) == k { DayState::Unused } else { c(x % (k + 1) + 1) }).collect())
                .collect();
            let m = transition_matrix(k, &seqs);
            for row in &m.probs {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }
}
