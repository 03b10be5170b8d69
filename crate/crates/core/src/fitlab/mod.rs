//! Fitting and inference: least squares, the sigmoid LM fit, nested-model
//! tests, rank correlation, agreement, bootstrap and the relevance sweep.

pub mod agreement;
pub mod bootstrap;
pub mod logistic;
pub mod nested;
pub mod ols;
pub mod rank;
pub mod sweep;

pub use agreement::{
    cohen_kappa, confusion_stats, kappa_table, weighted_kappa_3level, ConfusionMatrix2x2, ConfusionStats,
};
pub use bootstrap::{bootstrap_ci, bootstrap_median_ci, BootstrapCI, DEFAULT_RESAMPLES};
pub use logistic::{
    cluster_robust_se, fit_logistic, fit_sigmoid, fit_sigmoid_size_only, fit_sigmoid_with, LmSettings, LogisticFit,
    SigmoidFit,
};
pub use nested::{incremental_f, FTest, NestedModel};
pub use ols::{fit_ols, fit_wls, weighted_loglog_fit, OlsFit};
pub use rank::{average_ranks, spearman, Spearman};
pub use sweep::{partial_weight_sweep, Covariates, SweepRow, DEFAULT_SWEEP_WEIGHTS};
