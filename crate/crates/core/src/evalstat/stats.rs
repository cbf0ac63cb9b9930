//! Friedman rank test with a Bonferroni-Dunn critical difference.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 blocks and 2 treatments, got {blocks}×{treatments}")]
    Degenerate { blocks: usize, treatments: usize },
    #[error("score matrix row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("non-finite score at block {block}, treatment {treatment}")]
    NonFinite { block: usize, treatment: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// Blocks (folds) × treatments (models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub treatments: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// When set, the largest score in a block gets rank 1.
    pub higher_is_better: bool,
}

impl ScoreMatrix {
    pub fn new(treatments: Vec<String>, rows: Vec<Vec<f64>>, higher_is_better: bool) -> Result<Self, StatsError> {
        let k = treatments.len();
        if rows.len() < 2 || k < 2 {
            return Err(StatsError::Degenerate {
                blocks: rows.len(),
                treatments: k,
            });
        }
        for (b, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(StatsError::Ragged {
                    row: b,
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(t) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite { block: b, treatment: t });
            }
        }
        Ok(Self {
            treatments,
            rows,
            higher_is_better,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.rows.len()
    }

    pub fn n_treatments(&self) -> usize {
        self.treatments.len()
    }
}

/// Ranks `1..=k` within one block, best first; ties share their average rank.
pub fn rank_block(scores: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let c = scores[a].total_cmp(&scores[b]);
        if higher_is_better { c.reverse() } else { c }
    });
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub treatments: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub n_blocks: usize,
}

/// Friedman test: `χ²_F = 12n / (k(k+1)) · Σⱼ (R̄ⱼ − (k+1)/2)²` with a
/// chi-square p-value on `k − 1` degrees of freedom.
pub fn friedman(scores: &ScoreMatrix) -> Result<FriedmanResult, StatsError> {
    let n = scores.n_blocks();
    let k = scores.n_treatments();
    if n < 2 || k < 2 {
        return Err(StatsError::Degenerate { blocks: n, treatments: k });
    }
    let mut sums = vec![0.0; k];
    for row in &scores.rows {
        for (s, r) in sums.iter_mut().zip(rank_block(row, scores.higher_is_better)) {
            *s += r;
        }
    }
    let mean_ranks: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let center = (k as f64 + 1.0) / 2.0;
    let spread: f64 = mean_ranks.iter().map(|r| (r - center).powi(2)).sum();
    let statistic = (12.0 * n as f64 / (k as f64 * (k as f64 + 1.0)) * spread).max(0.0);
    let df = k - 1;
    let chi2 = ChiSquared::new(df as f64).expect("df >= 1");
    let p_value = chi2.sf(statistic);
    Ok(FriedmanResult {
        treatments: scores.treatments.clone(),
        mean_ranks,
        statistic,
        df,
        p_value,
        n_blocks: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision {
    pub first: String,
    pub second: String,
    pub rank_difference: f64,
    pub critical_difference: f64,
    pub significant: bool,
}

/// Bonferroni-Dunn critical difference on mean ranks:
/// `z_{1 − α/(2(k−1))} · √(k(k+1) / (6n))`.
pub fn critical_difference(k: usize, n_blocks: usize, alpha: f64) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    if k < 2 || n_blocks < 2 {
        return Err(StatsError::Degenerate {
            blocks: n_blocks,
            treatments: k,
        });
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / (2.0 * (k as f64 - 1.0)));
    Ok(z * (k as f64 * (k as f64 + 1.0) / (6.0 * n_blocks as f64)).sqrt())
}

/// Compares every pair of treatments against the critical difference.
pub fn bonferroni_pairwise(result: &FriedmanResult, alpha: f64) -> Result<Vec<PairDecision>, StatsError> {
    let k = result.mean_ranks.len();
    let cd = critical_difference(k, result.n_blocks, alpha)?;
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let diff = (result.mean_ranks[i] - result.mean_ranks[j]).abs();
            out.push(PairDecision {
                first: result.treatments[i].clone(),
                second: result.treatments[j].clone(),
                rank_difference: diff,
                critical_difference: cd,
                significant: diff > cd,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn average_ranks_on_ties() {
        assert_eq!(rank_block(&[0.9, 0.5, 0.9, 0.1], true), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(rank_block(&[3.0, 1.0, 2.0], false), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn identical_blocks_give_zero_statistic() {
        let m = ScoreMatrix::new(names(3), vec![vec![0.5; 3]; 6], true).unwrap();
        let r = friedman(&m).unwrap();
        assert!(r.mean_ranks.iter().all(|&x| x == 2.0));
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strict_order_three_by_four() {
        let m = ScoreMatrix::new(names(3), vec![vec![3.0, 2.0, 1.0]; 4], true).unwrap();
        let r = friedman(&m).unwrap();
        assert_eq!(r.mean_ranks, vec![1.0, 2.0, 3.0]);
        assert!((r.statistic - 8.0).abs() < 1e-12);
    }

    #[test]
    fn critical_difference_k4_n10() {
        let cd = critical_difference(4, 10, 0.05).unwrap();
        assert!((cd - 1.382).abs() < 1e-3, "{cd}");
        assert!(critical_difference(4, 10, 0.0).is_err());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ScoreMatrix::new(names(1), vec![vec![1.0]; 3], true).is_err());
        assert!(ScoreMatrix::new(names(2), vec![vec![1.0, 2.0]], true).is_err());
        assert!(matches!(
            ScoreMatrix::new(names(2), vec![vec![1.0, 2.0], vec![1.0]], true),
            Err(StatsError::Ragged { row: 1, .. })
        ));
    }

    fn arb_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..6, 2usize..12).prop_flat_map(|(k, n)| {
            prop::collection::vec(prop::collection::vec(-5i32..5, k), n)
                .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
        })
    }

    proptest! {
        #[test]
        fn ranks_sum_and_invariances(rows in arb_matrix(), shift in -3.0f64..3.0, perm_seed in any::<u64>()) {
            let k = rows[0].len();
            let m = ScoreMatrix::new(names(k), rows.clone(), true).unwrap();
            let r = friedman(&m).unwrap();
            let total: f64 = r.mean_ranks.iter().sum();
            prop_assert!((total - (k * (k + 1)) as f64 / 2.0).abs() < 1e-9);
            prop_assert!(r.statistic >= 0.0);

            // strictly increasing transform within blocks
            let transformed: Vec<Vec<f64>> = rows.iter().map(|row| row.iter().map(|v| (v * 0.7 + shift).exp()).collect()).collect();
            let r2 = friedman(&ScoreMatrix::new(names(k), transformed, true).unwrap()).unwrap();
            prop_assert_eq!(&r.mean_ranks, &r2.mean_ranks);
            prop_assert!((r.statistic - r2.statistic).abs() < 1e-12);
            prop_assert_eq!(
                bonferroni_pairwise(&r, 0.05).unwrap(),
                bonferroni_pairwise(&r2, 0.05).unwrap()
            );

            // block exchangeability
            let mut permuted = rows.clone();
            permuted.rotate_left((perm_seed as usize) % rows.len());
            let r3 = friedman(&ScoreMatrix::new(names(k), permuted, true).unwrap()).unwrap();
            prop_assert!((r.statistic - r3.statistic).abs() < 1e-9);
        }
    }
}
