//! SVM classification: standardization, SMO, one-vs-rest, grouped CV and metrics.

mod cv;
mod metrics;
mod multiclass;
mod standardize;
mod svm;

pub use cv::{session_folds, session_grouped_cv, Fold};
pub use metrics::{metrics, roc_auc, EvalReport, FoldReport};
pub use multiclass::{
    argmax_labels, predict, train_multiclass, train_multiclass_raw, KernelSpec, LabeledDataset, SvmConfig, SvmModel,
};
pub use standardize::{standardize_fit_transform, Standardizer};
pub use svm::{dual_objective, solve_dual, train_binary_svm, BinaryMachine, DualSolution, Kernel, SmoConfig};
