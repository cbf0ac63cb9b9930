//! Scores, cross-validation and model comparison.

pub mod cv;
pub mod metrics;
pub mod stats;

pub use cv::{
    check_cover, cross_validate, fit_fold, run_fold, run_folds, CvResult, EvalReport, Family, FitDiagnostics, FoldFit, FoldOutcome,
    KernelChoice, ModelError, ModelKind, ModelSpec, TrainedModel, MEAN_LABEL, MODEL_FORMAT_VERSION,
};
pub use metrics::{eqm, r_square, sq_res, sq_tot, MetricError};
pub use stats::{bonferroni_pairwise, critical_difference, friedman, rank_block, FriedmanResult, PairDecision, ScoreMatrix, StatsError};
