use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, Sample};
use crate::rng::seeded;

/// A deterministic k-fold partition of the train/validation samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub grouped: bool,
    /// Fold index for each sample, in sample order.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn val_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(|f| f == fold)
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(|f| f != fold)
    }

    fn indices_where(&self, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| pred(f))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Partitions `samples` into `k` folds.
///
/// Groups (source records when `grouped`, single samples otherwise) are
/// listed in order of first appearance, shuffled with a ChaCha8 generator
/// seeded by `seed`, and dealt round-robin, so fold sizes differ by at most
/// one group.
pub fn assign_folds(
    samples: &[Sample],
    k: usize,
    seed: u64,
    grouped: bool,
) -> Result<FoldAssignment, DataError> {
    if k < 2 {
        return Err(DataError::InvalidK(k));
    }
    let mut group_of = Vec::with_capacity(samples.len());
    let n_groups = if grouped {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for s in samples {
            let next = ids.len();
            group_of.push(*ids.entry(s.source_record_id.as_str()).or_insert(next));
        }
        ids.len()
    } else {
        group_of.extend(0..samples.len());
        samples.len()
    };
    if n_groups < k {
        return Err(DataError::TooFewGroups { k, groups: n_groups });
    }

    let mut order: Vec<usize> = (0..n_groups).collect();
    order.shuffle(&mut seeded(seed));
    let mut fold_of_group = vec![0; n_groups];
    for (pos, g) in order.into_iter().enumerate() {
        fold_of_group[g] = pos % k;
    }
    Ok(FoldAssignment {
        k,
        seed,
        grouped,
        assignment: group_of.into_iter().map(|g| fold_of_group[g]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;

    fn samples(ids: &[&str]) -> Vec<Sample> {
        ids.iter()
            .map(|id| Sample {
                source_record_id: id.to_string(),
                features: vec![0.0],
                target: 0.0,
                split: Split::TrainVal,
            })
            .collect()
    }

    #[test]
    fn even_split_ungrouped() {
        let ids: Vec<String> = (0..100).map(|i| format!("r{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let f = assign_folds(&samples(&refs), 10, 7, false).unwrap();
        assert_eq!(f.fold_sizes(), vec![10; 10]);
    }

    #[test]
    fn deterministic_for_same_seed() {
        let ids: Vec<String> = (0..57).map(|i| format!("r{}", i / 3)).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let s = samples(&refs);
        assert_eq!(assign_folds(&s, 10, 42, true).unwrap(), assign_folds(&s, 10, 42, true).unwrap());
        assert_ne!(
            assign_folds(&s, 10, 42, false).unwrap(),
            assign_folds(&s, 10, 43, false).unwrap()
        );
    }

    #[test]
    fn grouped_keeps_record_together() {
        let mut ids = vec!["R"; 32];
        let others: Vec<String> = (0..40).map(|i| format!("o{}", i / 2)).collect();
        ids.extend(others.iter().map(String::as_str));
        let f = assign_folds(&samples(&ids), 10, 3, true).unwrap();
        let fold = f.assignment[0];
        assert!(f.assignment[..32].iter().all(|&x| x == fold));
    }

    #[test]
    fn too_few_groups() {
        let s = samples(&["a", "a", "b", "b"]);
        assert!(matches!(
            assign_folds(&s, 3, 0, true),
            Err(DataError::TooFewGroups { k: 3, groups: 2 })
        ));
        assert!(assign_folds(&s, 3, 0, false).is_ok());
        assert!(matches!(assign_folds(&s, 1, 0, false), Err(DataError::InvalidK(1))));
    }

    #[test]
    fn partition_of_all_samples() {
        let ids: Vec<String> = (0..73).map(|i| format!("r{}", i % 19)).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let f = assign_folds(&samples(&refs), 5, 11, true).unwrap();
        let mut seen = vec![0; 73];
        for fold in 0..5 {
            let val = f.val_indices(fold);
            let train = f.train_indices(fold);
            assert_eq!(val.len() + train.len(), 73);
            for i in val {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
