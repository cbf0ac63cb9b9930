//! Shared-fold cross-validation over the four model families.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::{eqm, r_square, MetricError};
use crate::dataset::{DataError, FoldAssignment, Property, Sample, Scaler};
use crate::linear::{LinearError, LinearModel, PolynomialSpec};
use crate::nn::{self, init_network, Batch, NetworkSpec, NnError, StopReason, TrainerSpec};
use crate::parallel::par_map;
use crate::rng::{fold_seed, seeded};
use crate::svr::{self, default_gamma, fit_svr, KernelSpec, SvrError, SvrParams};
use crate::tree::{self, PrunePolicy, TreeError, TreeParams};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Svr(#[from] SvrError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<ModelError>,
    },
    #[error("fold assignment covers {folds} samples but {samples} were given")]
    FoldMismatch { folds: usize, samples: usize },
    #[error("bad report CSV: {0}")]
    ReportFormat(String),
}

impl ModelError {
    /// True for failures of the numerics rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        match self {
            ModelError::Fold { source, .. } => source.is_numerical(),
            ModelError::Linear(LinearError::Singular(_)) | ModelError::Nn(NnError::Diverged { .. }) => true,
            ModelError::Metric(_) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nn,
    Svr,
    Tree,
    Linear,
}

impl Family {
    /// Column order of the comparison tables.
    pub const ALL: [Family; 4] = [Family::Nn, Family::Svr, Family::Tree, Family::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Family::Nn => "nn",
            Family::Svr => "svr",
            Family::Tree => "tree",
            Family::Linear => "linear",
        }
    }

    /// Short column label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::Nn => "NN",
            Family::Svr => "SVR",
            Family::Tree => "DT",
            Family::Linear => "LR",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown model family `{s}` (expected linear, nn, svr or tree)"))
    }
}

/// Kernel choice for a grid; a Gaussian without `gamma` uses
/// [`default_gamma`] on each fold's scaled training features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelChoice {
    Linear,
    Polynomial { degree: u32, coef0: f64 },
    #[serde(alias = "rbf")]
    Gaussian { gamma: Option<f64> },
}

impl KernelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            KernelChoice::Linear => "linear",
            KernelChoice::Polynomial { .. } => "polynomial",
            KernelChoice::Gaussian { .. } => "gaussian",
        }
    }

    fn resolve(&self, x: &[Vec<f64>]) -> KernelSpec {
        match *self {
            KernelChoice::Linear => KernelSpec::Linear,
            KernelChoice::Polynomial { degree, coef0 } => KernelSpec::Polynomial { degree, coef0 },
            KernelChoice::Gaussian { gamma } => KernelSpec::Gaussian {
                gamma: gamma.unwrap_or_else(|| default_gamma(x)),
            },
        }
    }
}

/// One fully specified model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Linear {
        poly: PolynomialSpec,
    },
    Nn {
        n_hidden: usize,
        trainer: TrainerSpec,
        /// Per-fold network seeds are `seed ^ fold`.
        seed: u64,
        max_train_samples: Option<usize>,
    },
    Svr {
        kernel: KernelChoice,
        params: SvrParams,
        seed: u64,
        max_train_samples: Option<usize>,
    },
    Tree {
        params: TreeParams,
        prune: PrunePolicy,
    },
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        match self {
            ModelSpec::Linear { .. } => Family::Linear,
            ModelSpec::Nn { .. } => Family::Nn,
            ModelSpec::Svr { .. } => Family::Svr,
            ModelSpec::Tree { .. } => Family::Tree,
        }
    }

    /// Short human-readable variant name.
    pub fn variant(&self) -> String {
        match self {
            ModelSpec::Linear { poly } => format!(
                "degree{}{}-lambda{}",
                poly.degree,
                if poly.interactions { "x" } else { "" },
                poly.lambda
            ),
            ModelSpec::Nn { n_hidden, trainer, .. } => format!("h{}-{}", n_hidden, trainer.algorithm),
            ModelSpec::Svr { kernel, .. } => kernel.name().to_string(),
            ModelSpec::Tree { prune, .. } => format!("pruned-gap{}", prune.gap_tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Linear(LinearModel),
    Nn(nn::Network),
    Svr(svr::SvrModel),
    Tree(tree::RegressionTree),
}

/// A fitted predictor from any family. Inputs are raw feature vectors;
/// scaling and target back-transformation happen inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub variant: String,
    pub scaler: Scaler,
    pub model: ModelKind,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

impl TrainedModel {
    pub fn family(&self) -> Family {
        match self.model {
            ModelKind::Linear(_) => Family::Linear,
            ModelKind::Nn(_) => Family::Nn,
            ModelKind::Svr(_) => Family::Svr,
            ModelKind::Tree(_) => Family::Tree,
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        let x = self.scaler.transform(features)?;
        let z = match &self.model {
            ModelKind::Linear(m) => m.predict(&x)?,
            ModelKind::Nn(m) => m.forward(&x)?,
            ModelKind::Svr(m) => m.predict(&x)?,
            ModelKind::Tree(m) => m.predict(&x)?,
        };
        Ok(self.scaler.inverse_target(z))
    }

    pub fn predict_all(&self, samples: &[Sample]) -> Result<Vec<f64>, ModelError> {
        samples.iter().map(|s| self.predict(&s.features)).collect()
    }

    /// Versioned JSON serialization.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::ReportFormat(format!("model file: {e}")))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::ReportFormat(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        Ok(file.model)
    }
}

/// Extra per-fit information, depending on the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FitDiagnostics {
    Linear,
    Nn {
        best_epoch: usize,
        stop_reason: StopReason,
        history: nn::History,
    },
    Svr {
        status: svr::FitStatus,
        n_support: usize,
        kernel: KernelSpec,
    },
    Tree {
        full_leaves: usize,
        selected_leaves: usize,
        train_r2: f64,
        val_r2: f64,
        within_tolerance: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldFit {
    pub model: TrainedModel,
    pub val_r2: f64,
    pub diagnostics: FitDiagnostics,
}

fn split_xy(samples: &[Sample], idx: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    idx.iter()
        .map(|&i| (samples[i].features.clone(), samples[i].target))
        .unzip()
}

fn subsample(n: usize, cap: Option<usize>, seed: u64) -> Option<Vec<usize>> {
    match cap {
        Some(cap) if n > cap => {
            let mut idx = sample_indices(&mut seeded(seed), n, cap).into_vec();
            idx.sort_unstable();
            Some(idx)
        }
        _ => None,
    }
}

/// Fits `spec` on `train` (scaler included) and scores it on `val`.
pub fn fit_fold(spec: &ModelSpec, train: &[Sample], val: &[Sample], seed: u64) -> Result<FoldFit, ModelError> {
    let all: Vec<usize> = (0..train.len()).collect();
    let (raw_x, raw_y) = split_xy(train, &all);
    let (val_raw_x, val_y) = split_xy(val, &(0..val.len()).collect::<Vec<_>>());
    let standardize = matches!(spec, ModelSpec::Nn { .. } | ModelSpec::Svr { .. });
    let scaler = Scaler::fit(&raw_x, standardize.then_some(raw_y.as_slice()))?;
    let mut x = scaler.transform_rows(&raw_x)?;
    let mut y: Vec<f64> = raw_y.iter().map(|&v| scaler.transform_target(v)).collect();
    let val_x = scaler.transform_rows(&val_raw_x)?;
    let val_z: Vec<f64> = val_y.iter().map(|&v| scaler.transform_target(v)).collect();

    let cap = match spec {
        ModelSpec::Nn { max_train_samples, .. } | ModelSpec::Svr { max_train_samples, .. } => *max_train_samples,
        _ => None,
    };
    if let Some(idx) = subsample(x.len(), cap, seed) {
        x = idx.iter().map(|&i| x[i].clone()).collect();
        y = idx.iter().map(|&i| y[i]).collect();
    }

    let (model, diagnostics) = match spec {
        ModelSpec::Linear { poly } => (ModelKind::Linear(LinearModel::fit(&x, &y, *poly)?), FitDiagnostics::Linear),
        ModelSpec::Nn { n_hidden, trainer, .. } => {
            let net = init_network(&NetworkSpec::new(x[0].len(), *n_hidden, seed)?);
            let trained = nn::train(net, Batch::new(&x, &y)?, Batch::new(&val_x, &val_z)?, trainer)?;
            (
                ModelKind::Nn(trained.network),
                FitDiagnostics::Nn {
                    best_epoch: trained.best_epoch,
                    stop_reason: trained.stop_reason,
                    history: trained.history,
                },
            )
        }
        ModelSpec::Svr { kernel, params, .. } => {
            let kernel = kernel.resolve(&x);
            let m = fit_svr(&x, &y, kernel, *params)?;
            let diag = FitDiagnostics::Svr {
                status: m.status,
                n_support: m.support_vectors.len(),
                kernel,
            };
            (ModelKind::Svr(m), diag)
        }
        ModelSpec::Tree { params, prune } => {
            let full = tree::grow(&x, &y, *params)?;
            let seq = tree::prune_sequence(&full);
            let sel = tree::select_pruned(&seq, &val_x, &val_z, *prune)?;
            let diag = FitDiagnostics::Tree {
                full_leaves: full.n_leaves(),
                selected_leaves: sel.tree.n_leaves(),
                train_r2: sel.train_r2,
                val_r2: sel.val_r2,
                within_tolerance: sel.within_tolerance,
            };
            (ModelKind::Tree(sel.tree), diag)
        }
    };
    let model = TrainedModel {
        variant: spec.variant(),
        scaler,
        model,
    };
    let val_pred = model.predict_all(val)?;
    let val_r2 = r_square(&val_y, &val_pred)?;
    Ok(FoldFit {
        model,
        val_r2,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub fit: FoldFit,
    pub test_predictions: Vec<f64>,
    pub test_r2: f64,
    pub test_eqm: f64,
}

/// Fits fold `fold` of `spec` (training on the other folds) and predicts
/// the test set. The model seed is `fold_seed(seed, fold)`.
pub fn run_fold(
    spec: &ModelSpec,
    samples: &[Sample],
    folds: &FoldAssignment,
    test: &[Sample],
    seed: u64,
    fold: usize,
) -> Result<FoldOutcome, ModelError> {
    let pick = |idx: Vec<usize>| -> Vec<Sample> { idx.into_iter().map(|i| samples[i].clone()).collect() };
    let train = pick(folds.train_indices(fold));
    let val = pick(folds.val_indices(fold));
    let fit = fit_fold(spec, &train, &val, fold_seed(seed, fold))?;
    let test_predictions = fit.model.predict_all(test)?;
    let test_y: Vec<f64> = test.iter().map(|s| s.target).collect();
    Ok(FoldOutcome {
        fold,
        test_r2: r_square(&test_y, &test_predictions)?,
        test_eqm: eqm(&test_y, &test_predictions)?,
        fit,
        test_predictions,
    })
}

/// Fits every fold of `spec` (in parallel when `jobs > 1`). Results are in
/// fold order and do not depend on `jobs`.
pub fn run_folds(
    spec: &ModelSpec,
    samples: &[Sample],
    folds: &FoldAssignment,
    test: &[Sample],
    seed: u64,
    jobs: usize,
) -> Result<Vec<Result<FoldOutcome, ModelError>>, ModelError> {
    check_cover(samples, folds)?;
    Ok(par_map(jobs, folds.k, |fold| run_fold(spec, samples, folds, test, seed, fold)))
}

/// Errors unless `folds` assigns exactly the given samples.
pub fn check_cover(samples: &[Sample], folds: &FoldAssignment) -> Result<(), ModelError> {
    if folds.len() != samples.len() {
        return Err(ModelError::FoldMismatch {
            folds: folds.len(),
            samples: samples.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub report: EvalReport,
    pub folds: Vec<FoldOutcome>,
}

/// For each fold: fit on the other folds, validate on it, and score the
/// fitted predictor on the held-out test set. The first failing fold aborts
/// with its index attached.
pub fn cross_validate(
    spec: &ModelSpec,
    property: Property,
    samples: &[Sample],
    folds: &FoldAssignment,
    test: &[Sample],
    seed: u64,
    jobs: usize,
) -> Result<CvResult, ModelError> {
    let outcomes = run_folds(spec, samples, folds, test, seed, jobs)?
        .into_iter()
        .enumerate()
        .map(|(fold, r)| {
            r.map_err(|e| ModelError::Fold {
                fold,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = EvalReport::new(
        spec.family(),
        property,
        spec.variant(),
        outcomes.iter().map(|o| o.test_r2).collect(),
        outcomes.iter().map(|o| o.test_eqm).collect(),
    );
    Ok(CvResult {
        report,
        folds: outcomes,
    })
}

/// Row label of the mean line in report tables.
pub const MEAN_LABEL: &str = "Média";

/// Per-fold test scores of one model family on one property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub family: Family,
    pub property: Property,
    pub variant: String,
    pub fold_r2: Vec<f64>,
    pub fold_eqm: Vec<f64>,
    pub mean_r2: f64,
    pub mean_eqm: f64,
}

fn mean_finite(v: &[f64]) -> f64 {
    let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

impl EvalReport {
    /// Failed folds are entered as NaN and left out of the means.
    pub fn new(family: Family, property: Property, variant: String, fold_r2: Vec<f64>, fold_eqm: Vec<f64>) -> Self {
        Self {
            family,
            property,
            variant,
            mean_r2: mean_finite(&fold_r2),
            mean_eqm: mean_finite(&fold_eqm),
            fold_r2,
            fold_eqm,
        }
    }

    pub fn k(&self) -> usize {
        self.fold_r2.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,property,variant,fold,r2,eqm\n");
        let prefix = format!("{},{},{}", self.family, self.property, self.variant);
        for (i, (r2, e)) in self.fold_r2.iter().zip(&self.fold_eqm).enumerate() {
            let _ = writeln!(out, "{prefix},{},{r2},{e}", i + 1);
        }
        let _ = writeln!(out, "{prefix},{MEAN_LABEL},{},{}", self.mean_r2, self.mean_eqm);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ModelError> {
        let bad = |m: String| ModelError::ReportFormat(m);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["family", "property", "variant", "fold", "r2", "eqm"] {
            return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
        }
        let mut meta: Option<(Family, Property, String)> = None;
        let (mut r2, mut eq) = (Vec::new(), Vec::new());
        let mut saw_mean = false;
        for row in rdr.records() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let family: Family = row[0].parse().map_err(bad)?;
            let property: Property = row[1].parse().map_err(|e: DataError| bad(e.to_string()))?;
            let this = (family, property, row[2].to_string());
            match &meta {
                None => meta = Some(this),
                Some(m) if *m != this => return Err(bad("mixed families/properties in one report".into())),
                _ => {}
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            if &row[3] == MEAN_LABEL {
                saw_mean = true;
                continue;
            }
            let fold: usize = row[3].parse().map_err(|_| bad(format!("bad fold label `{}`", &row[3])))?;
            if fold != r2.len() + 1 {
                return Err(bad(format!("fold {fold} out of order")));
            }
            r2.push(num(&row[4])?);
            eq.push(num(&row[5])?);
        }
        let (family, property, variant) = meta.ok_or_else(|| bad("empty report".into()))?;
        if !saw_mean {
            return Err(bad(format!("missing `{MEAN_LABEL}` row")));
        }
        Ok(Self::new(family, property, variant, r2, eq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{assign_folds, Split};
    use crate::svr::SvrParams;
    use rand::Rng;

    fn toy(n_groups: usize, per: usize, seed: u64) -> (Vec<Sample>, Vec<Sample>) {
        let mut rng = seeded(seed);
        let f = |x: &[f64]| 3.0 + 2.0 * x[0] - x[1] * x[1];
        let mut train = Vec::new();
        let mut test = Vec::new();
        for g in 0..n_groups {
            let c = [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)];
            for _ in 0..per {
                let x = vec![c[0] + rng.random_range(-0.05..0.05), c[1] + rng.random_range(-0.05..0.05)];
                train.push(Sample {
                    source_record_id: g.to_string(),
                    target: f(&x),
                    features: x,
                    split: Split::TrainVal,
                });
            }
            test.push(Sample {
                source_record_id: g.to_string(),
                features: c.to_vec(),
                target: f(&c),
                split: Split::Test,
            });
        }
        (train, test)
    }

    fn specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Linear {
                poly: PolynomialSpec::new(2, false, 0.0).unwrap(),
            },
            ModelSpec::Nn {
                n_hidden: 3,
                trainer: TrainerSpec {
                    max_epochs: 50,
                    ..TrainerSpec::default()
                },
                seed: 1,
                max_train_samples: None,
            },
            ModelSpec::Svr {
                kernel: KernelChoice::Gaussian { gamma: None },
                params: SvrParams::default(),
                seed: 1,
                max_train_samples: Some(60),
            },
            ModelSpec::Tree {
                params: TreeParams::default(),
                prune: PrunePolicy::default(),
            },
        ]
    }

    #[test]
    fn report_shape_and_mean() {
        let (train, test) = toy(30, 4, 1);
        let folds = assign_folds(&train, 10, 3, true).unwrap();
        for spec in specs() {
            let cv = cross_validate(&spec, Property::Hardness, &train, &folds, &test, 5, 1).unwrap();
            assert_eq!(cv.report.k(), 10);
            let avg = cv.report.fold_r2.iter().sum::<f64>() / 10.0;
            assert!((cv.report.mean_r2 - avg).abs() < 1e-12);
            // R² and EQM describe the same residuals
            let ty: Vec<f64> = test.iter().map(|s| s.target).collect();
            let sst = crate::evalstat::metrics::sq_tot(&ty);
            for (r2, e) in cv.report.fold_r2.iter().zip(&cv.report.fold_eqm) {
                assert!((r2 - (1.0 - e * ty.len() as f64 / sst)).abs() < 1e-12);
            }
            assert!(cv.report.mean_r2 > 0.5, "{}: {}", spec.variant(), cv.report.mean_r2);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let (train, test) = toy(20, 3, 2);
        let folds = assign_folds(&train, 5, 4, true).unwrap();
        for spec in specs() {
            let a = cross_validate(&spec, Property::Yield, &train, &folds, &test, 9, 1).unwrap();
            let b = cross_validate(&spec, Property::Yield, &train, &folds, &test, 9, 4).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn report_csv_round_trip() {
        let r = EvalReport::new(
            Family::Svr,
            Property::Tensile,
            "gaussian".into(),
            vec![0.9, 0.95, 0.925],
            vec![1.0, 2.0, 0.5],
        );
        let csv = r.to_csv();
        assert!(csv.lines().last().unwrap().starts_with("svr,tensile,gaussian,Média,"));
        assert_eq!(EvalReport::from_csv(&csv).unwrap(), r);
        assert!(EvalReport::from_csv("family,property\n").is_err());
    }

    #[test]
    fn fold_error_carries_index() {
        let (train, test) = toy(10, 2, 3);
        let folds = assign_folds(&train, 2, 1, true).unwrap();
        let spec = ModelSpec::Nn {
            n_hidden: 2,
            trainer: TrainerSpec {
                max_epochs: 0,
                ..TrainerSpec::default()
            },
            seed: 0,
            max_train_samples: None,
        };
        match cross_validate(&spec, Property::Hardness, &train, &folds, &test, 0, 1) {
            Err(ModelError::Fold { fold: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn model_json_round_trip() {
        let (train, test) = toy(12, 2, 4);
        let folds = assign_folds(&train, 3, 1, true).unwrap();
        for spec in specs() {
            let cv = cross_validate(&spec, Property::Hardness, &train, &folds, &test, 0, 1).unwrap();
            let m = &cv.folds[0].fit.model;
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(&back, m);
            assert_eq!(back.predict_all(&test).unwrap(), cv.folds[0].test_predictions);
        }
    }
}
