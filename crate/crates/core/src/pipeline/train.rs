//! Hyperparameter grids per family, fold fitting and variant selection.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::PipelineError;
use crate::dataset::{assign_folds, FoldAssignment, Property, Sample};
use crate::evalstat::{
    check_cover, friedman, run_fold, EvalReport, Family, FoldOutcome, FriedmanResult, ModelError, ModelSpec,
    ScoreMatrix,
};
use crate::linear::{sweep, CurveTable, PolynomialSpec};
use crate::nn::TrainerSpec;
use crate::parallel::par_map;
use crate::rng::derive_seed;
use crate::svr::SvrParams;
use crate::tree::PrunePolicy;

/// Every cell of the family's grid, in a fixed order.
pub fn grid(cfg: &ExperimentConfig, family: Family) -> Vec<ModelSpec> {
    match family {
        // the linear grid is swept separately; this is only its shape
        Family::Linear => cfg
            .linear
            .degrees
            .iter()
            .flat_map(|&degree| {
                cfg.linear.lambdas.iter().map(move |&lambda| ModelSpec::Linear {
                    poly: PolynomialSpec {
                        degree,
                        interactions: cfg.linear.interactions,
                        lambda,
                    },
                })
            })
            .collect(),
        Family::Nn => {
            let g = &cfg.nn;
            let mut out = Vec::new();
            for &algorithm in &g.algorithms {
                for &n_hidden in &g.hidden {
                    let cell = out.len() as u64;
                    out.push(ModelSpec::Nn {
                        n_hidden,
                        trainer: TrainerSpec { algorithm, ..g.trainer },
                        seed: derive_seed(cfg.seed, cell),
                        max_train_samples: g.max_train_samples,
                    });
                }
            }
            out
        }
        Family::Svr => {
            let g = &cfg.svr;
            let mut out = Vec::new();
            for &kernel in &g.kernels {
                for &c in &g.c {
                    let cell = out.len() as u64;
                    out.push(ModelSpec::Svr {
                        kernel,
                        params: SvrParams { c, ..g.params },
                        seed: derive_seed(cfg.seed, cell),
                        max_train_samples: g.max_train_samples,
                    });
                }
            }
            out
        }
        Family::Tree => cfg
            .tree
            .gap_tol
            .iter()
            .map(|&gap_tol| ModelSpec::Tree {
                params: cfg.tree.params,
                prune: PrunePolicy { gap_tol },
            })
            .collect(),
    }
}

/// Validation scores of one grid cell across the folds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: String,
    pub spec: ModelSpec,
    /// NaN where the fold failed.
    pub val_r2: Vec<f64>,
    pub mean_val_r2: f64,
    pub mean_rank: Option<f64>,
    /// `(fold, message)` of every failed fold.
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub family: Family,
    pub property: Property,
    pub folds: FoldAssignment,
    pub report: EvalReport,
    pub selected: usize,
    pub variants: Vec<VariantSummary>,
    /// Rank test over the variants, when more than one was eligible.
    pub friedman: Option<FriedmanResult>,
    pub curve: Option<CurveTable>,
    /// Outcome of the selected variant per fold; `None` for failed folds.
    pub outcomes: Vec<Option<FoldOutcome>>,
}

fn mean_finite(v: &[f64]) -> f64 {
    let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if f.is_empty() {
        f64::NAN
    } else {
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// Index of the best variant. Only variants with the most successful folds
/// are eligible. With `use_ranks`, the lowest mean Friedman rank of fold
/// validation R² wins (ties broken by mean validation R²); otherwise the
/// highest mean validation R² wins. Earlier cells win exact ties.
fn select(variants: &mut [VariantSummary], use_ranks: bool) -> Result<(usize, Option<FriedmanResult>), PipelineError> {
    let successes = |v: &VariantSummary| v.val_r2.iter().filter(|x| x.is_finite()).count();
    let best_success = variants.iter().map(successes).max().unwrap_or(0);
    if best_success == 0 {
        return Err(PipelineError::Numerical("every fold of every grid cell failed".into()));
    }
    let eligible: Vec<usize> = (0..variants.len())
        .filter(|&i| successes(&variants[i]) == best_success)
        .collect();
    let complete_blocks: Vec<usize> = (0..variants[0].val_r2.len())
        .filter(|&f| eligible.iter().all(|&i| variants[i].val_r2[f].is_finite()))
        .collect();

    let mut ranks = None;
    if use_ranks && eligible.len() >= 2 && complete_blocks.len() >= 2 {
        let m = ScoreMatrix::new(
            eligible.iter().map(|&i| variants[i].variant.clone()).collect(),
            complete_blocks
                .iter()
                .map(|&f| eligible.iter().map(|&i| variants[i].val_r2[f]).collect())
                .collect(),
            true,
        )?;
        let r = friedman(&m)?;
        for (pos, &i) in eligible.iter().enumerate() {
            variants[i].mean_rank = Some(r.mean_ranks[pos]);
        }
        ranks = Some(r);
    }
    let key = |i: usize| {
        let rank = variants[i].mean_rank.unwrap_or(0.0);
        (rank, -variants[i].mean_val_r2)
    };
    let best = eligible
        .iter()
        .copied()
        .reduce(|a, b| {
            let (ka, kb) = (key(a), key(b));
            if kb.0 < ka.0 || (kb.0 == ka.0 && kb.1 < ka.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one eligible variant");
    Ok((best, ranks))
}

/// Trains one family on one property: sweeps its grid over shared grouped
/// folds, selects a variant from validation scores, and reports the
/// selected variant's test scores per fold.
///
/// Fold failures are recorded; the call fails only if every fold of every
/// cell fails.
pub fn train_family(
    cfg: &ExperimentConfig,
    family: Family,
    property: Property,
    train_val: &[Sample],
    test: &[Sample],
    jobs: usize,
) -> Result<TrainOutcome, PipelineError> {
    let folds = assign_folds(train_val, cfg.folds.k, cfg.seed, cfg.folds.grouped)?;
    check_cover(train_val, &folds).map_err(|e| PipelineError::model(family.name(), e))?;
    let k = folds.k;

    let (specs, curve) = if family == Family::Linear {
        let x: Vec<&[f64]> = train_val.iter().map(|s| s.features.as_slice()).collect();
        let y: Vec<f64> = train_val.iter().map(|s| s.target).collect();
        let curve = sweep(&x, &y, &folds, &cfg.linear.degrees, &cfg.linear.lambdas, cfg.linear.interactions)
            .map_err(|e| PipelineError::model("linear sweep", ModelError::Linear(e)))?;
        let best = *curve.best_row();
        let spec = ModelSpec::Linear {
            poly: PolynomialSpec {
                degree: best.degree,
                interactions: cfg.linear.interactions,
                lambda: best.lambda,
            },
        };
        (vec![spec], Some(curve))
    } else {
        (grid(cfg, family), None)
    };

    let cells = specs.len() * k;
    let results = par_map(jobs, cells, |c| {
        let (v, f) = (c / k, c % k);
        run_fold(&specs[v], train_val, &folds, test, cfg.seed, f)
    });
    let mut per_variant: Vec<Vec<Result<FoldOutcome, ModelError>>> = Vec::with_capacity(specs.len());
    let mut it = results.into_iter();
    for _ in 0..specs.len() {
        per_variant.push(it.by_ref().take(k).collect());
    }

    let mut variants: Vec<VariantSummary> = specs
        .iter()
        .zip(&per_variant)
        .map(|(spec, outs)| {
            let val_r2: Vec<f64> = outs
                .iter()
                .map(|o| o.as_ref().map_or(f64::NAN, |o| o.fit.val_r2))
                .collect();
            VariantSummary {
                variant: spec.variant(),
                spec: spec.clone(),
                mean_val_r2: mean_finite(&val_r2),
                val_r2,
                mean_rank: None,
                failures: outs
                    .iter()
                    .enumerate()
                    .filter_map(|(f, o)| o.as_ref().err().map(|e| (f, e.to_string())))
                    .collect(),
            }
        })
        .collect();
    if variants.iter().all(|v| v.failures.len() == k) {
        let (fold, msg) = variants[0].failures[0].clone();
        return Err(PipelineError::Numerical(format!(
            "{family} on {property}: every fold failed (fold {fold}: {msg})"
        )));
    }
    let use_ranks = matches!(family, Family::Nn | Family::Svr);
    let (selected, friedman) = select(&mut variants, use_ranks)?;

    let outcomes: Vec<Option<FoldOutcome>> = per_variant
        .swap_remove(selected)
        .into_iter()
        .map(Result::ok)
        .collect();
    let report = EvalReport::new(
        family,
        property,
        variants[selected].variant.clone(),
        outcomes.iter().map(|o| o.as_ref().map_or(f64::NAN, |o| o.test_r2)).collect(),
        outcomes.iter().map(|o| o.as_ref().map_or(f64::NAN, |o| o.test_eqm)).collect(),
    );
    Ok(TrainOutcome {
        family,
        property,
        folds,
        report,
        selected,
        variants,
        friedman,
        curve,
        outcomes,
    })
}

impl TrainOutcome {
    /// One row per grid cell: validation R² per fold, mean, mean rank and
    /// whether the cell was selected.
    pub fn variants_csv(&self) -> String {
        let k = self.folds.k;
        let mut out = String::from("variant");
        for f in 1..=k {
            let _ = write!(out, ",val_r2_fold{f}");
        }
        out.push_str(",mean_val_r2,mean_rank,failed_folds,selected\n");
        for (i, v) in self.variants.iter().enumerate() {
            out.push_str(&v.variant);
            for r in &v.val_r2 {
                let _ = write!(out, ",{r}");
            }
            let rank = v.mean_rank.map_or(String::new(), |r| r.to_string());
            let _ = writeln!(
                out,
                ",{},{rank},{},{}",
                v.mean_val_r2,
                v.failures.len(),
                i == self.selected
            );
        }
        out
    }

    /// Test-set predictions of every fold model plus their mean.
    pub fn predictions_csv(&self, test: &[Sample]) -> String {
        let mut out = String::from("source_record_id,target");
        for f in 1..=self.folds.k {
            let _ = write!(out, ",fold{f}");
        }
        out.push_str(",mean_prediction\n");
        for (i, s) in self.mean_predictions().iter().enumerate() {
            let _ = write!(out, "{},{}", test[i].source_record_id, test[i].target);
            for o in &self.outcomes {
                match o {
                    Some(o) => {
                        let _ = write!(out, ",{}", o.test_predictions[i]);
                    }
                    None => out.push(','),
                }
            }
            let _ = writeln!(out, ",{s}");
        }
        out
    }

    /// Per test sample, the mean prediction over the successful folds.
    pub fn mean_predictions(&self) -> Vec<f64> {
        let ok: Vec<&FoldOutcome> = self.outcomes.iter().flatten().collect();
        let n = ok.first().map_or(0, |o| o.test_predictions.len());
        (0..n)
            .map(|i| ok.iter().map(|o| o.test_predictions[i]).sum::<f64>() / ok.len() as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{augment, AugmentPolicy};
    use crate::evalstat::KernelChoice;
    use crate::synth::{generate, GroundTruthSpec};

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.folds.k = 4;
        cfg.nn.hidden = vec![2, 4];
        cfg.nn.trainer.max_epochs = 30;
        cfg.nn.max_train_samples = Some(300);
        cfg.svr.kernels = vec![KernelChoice::Gaussian { gamma: None }, KernelChoice::Linear];
        cfg.svr.max_train_samples = Some(300);
        cfg.linear.degrees = vec![1, 2];
        cfg
    }

    fn data() -> (Vec<Sample>, Vec<Sample>) {
        let recs = generate(40, &GroundTruthSpec::default()).unwrap();
        let a = augment(&recs, &AugmentPolicy::new(Property::Hardness)).unwrap();
        (a.train_val, a.test)
    }

    #[test]
    fn every_family_trains_and_reports_k_folds() {
        let cfg = small_cfg();
        let (tv, test) = data();
        for family in Family::ALL {
            let out = train_family(&cfg, family, Property::Hardness, &tv, &test, 2).unwrap();
            assert_eq!(out.report.k(), 4);
            assert_eq!(out.report.family, family);
            assert!(out.outcomes.iter().all(Option::is_some));
            assert_eq!(out.variants_csv().lines().count(), out.variants.len() + 1);
            assert_eq!(out.predictions_csv(&test).lines().count(), test.len() + 1);
        }
    }

    #[test]
    fn ranked_selection_for_svr_grid() {
        let cfg = small_cfg();
        let (tv, test) = data();
        let out = train_family(&cfg, Family::Svr, Property::Hardness, &tv, &test, 1).unwrap();
        let r = out.friedman.as_ref().unwrap();
        assert_eq!(r.treatments.len(), 2);
        let sel = &out.variants[out.selected];
        assert!(out.variants.iter().all(|v| v.mean_rank.unwrap() >= sel.mean_rank.unwrap()));
    }

    #[test]
    fn single_cell_grid_reports_its_kernel() {
        let mut cfg = small_cfg();
        cfg.svr.kernels = vec![KernelChoice::Gaussian { gamma: None }];
        let (tv, test) = data();
        let out = train_family(&cfg, Family::Svr, Property::Hardness, &tv, &test, 1).unwrap();
        assert_eq!(out.report.variant, "gaussian");
        assert!(out.friedman.is_none());
    }

    #[test]
    fn jobs_do_not_change_results() {
        let cfg = small_cfg();
        let (tv, test) = data();
        let a = train_family(&cfg, Family::Nn, Property::Hardness, &tv, &test, 1).unwrap();
        let b = train_family(&cfg, Family::Nn, Property::Hardness, &tv, &test, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selection_prefers_complete_variants() {
        let mk = |name: &str, v: Vec<f64>| VariantSummary {
            variant: name.into(),
            spec: ModelSpec::Tree {
                params: Default::default(),
                prune: Default::default(),
            },
            mean_val_r2: mean_finite(&v),
            failures: v
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_finite())
                .map(|(f, _)| (f, "x".into()))
                .collect(),
            val_r2: v,
            mean_rank: None,
        };
        let mut vs = vec![
            mk("a", vec![0.99, f64::NAN, 0.99]),
            mk("b", vec![0.5, 0.6, 0.7]),
            mk("c", vec![0.6, 0.7, 0.8]),
        ];
        let (best, r) = select(&mut vs, true).unwrap();
        assert_eq!(best, 2);
        assert_eq!(r.unwrap().mean_ranks, vec![2.0, 1.0]);
        let mut none = vec![mk("a", vec![f64::NAN; 3])];
        assert!(select(&mut none, false).is_err());
    }
}
