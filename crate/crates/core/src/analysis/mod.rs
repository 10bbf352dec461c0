//! Metrics table, factor analysis, OOD-error regression, checkpoint
//! selection and cross-domain summaries.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use thiserror::Error;

mod factor;
mod regression;
mod rotation;
mod selection;
mod summary;
mod table;

pub use factor::{
    correlation_matrix, eigendecompose, factor_analysis, loadings, retain_factors, standardize, Eigen, FactorModel,
    Standardized,
};
pub use regression::{
    evaluate_regressor, fit_ood_regressor, residual_distribution, Evaluation, Protocol, RegressionModel,
    ResidualBucket, LABEL_FREE_FEATURES,
};
pub use rotation::{oblimax_criterion, oblimax_rotate, oblimax_rotate_with, RotationOptions, RotationResult};
pub use selection::{
    load_validation_csv, parse_validation_csv, select_model, Selection, SelectionStrategy, ValidationRecord,
};
pub use summary::{
    aggregate_summary, best_source, CrossEntry, CrossTable, ModelSummary, OutlierScope, OutlierSet, TargetSummary,
};
pub use table::{Metric, MetricsRow, MetricsTable};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("column {0} has zero variance")]
    ZeroVariance(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("expected a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("cannot take {k} factors from {p} variables")]
    FactorCount { k: usize, p: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("invalid value {value} in column {column}")]
    InvalidValue { column: String, value: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no features selected")]
    NoFeatures,
    #[error("cer_ood cannot be used to predict itself")]
    LabelLeak,
    #[error("leave-one-domain-out needs at least 2 target domains, got {0}")]
    TooFewDomains(usize),
    #[error("no residuals")]
    EmptyResiduals,
    #[error("bucket width must be positive, got {0}")]
    InvalidBucketWidth(f64),
    #[error("residuals must be finite and nonnegative, got {0}")]
    NegativeResidual(f64),
    #[error("no validation records")]
    NoRecords,
    #[error("domain {0:?} not present in the records")]
    UnknownDomain(String),
    #[error("no validation domains other than {0:?}")]
    NoHeldoutDomains(String),
    #[error("checkpoint {checkpoint:?} has no record for domain {domain:?}")]
    MissingRecord { checkpoint: String, domain: String },
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("{model}: no source other than {target:?} was evaluated on it")]
    NoOffDiagonal { model: String, target: String },
    #[error("{model}: no in-distribution result for {target:?}")]
    MissingId { model: String, target: String },
    #[error("{0}: every target is marked as an outlier")]
    AllExcluded(String),
}

impl AnalysisError {
    pub(crate) fn parse(line: usize, reason: impl Display) -> Self {
        AnalysisError::Parse {
            line,
            reason: reason.to_string(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        AnalysisError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
