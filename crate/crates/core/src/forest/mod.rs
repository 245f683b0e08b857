//! Random-forest regression.
//!
//! CART regression trees grown on bootstrap resamples, out-of-bag scoring,
//! permutation importance, cross-validated grid search and a Pearson
//! correlation matrix for the feature table.

mod correlation;
mod data;
mod ensemble;
mod grid;
mod tree;

pub use correlation::{correlation_matrix, CorrelationMatrix};
pub use data::{kfold, train_test_split, Dataset, SplitMode};
pub use ensemble::{
    fit_forest, permutation_importance, ForestModel, ForestParams, Importance, MODEL_FORMAT_VERSION,
};
pub use grid::{grid_search, CvRow, GridResult, ParamGrid};
pub use tree::{fit_tree, MaxFeatures, Tree, TreeParams, LEAF};

#[derive(Debug, thiserror::Error)]
pub enum ForestError {
    #[error("empty dataset")]
    Empty,
    #[error("undefined R² (zero target variance)")]
    UndefinedR2,
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("non-finite value in dataset")]
    NonFinite,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("no out-of-bag rows")]
    NoOob,
    #[error("model format version {0} is not supported")]
    Version(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coefficient of determination `1 − SSE/SST`.
pub fn r2_score(y: &[f64], yhat: &[f64]) -> Result<f64, ForestError> {
    if y.len() != yhat.len() {
        return Err(ForestError::Schema("prediction length".into()));
    }
    if y.len() < 2 {
        return Err(ForestError::UndefinedR2);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst <= 0.0 {
        return Err(ForestError::UndefinedR2);
    }
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - sse / sst)
}
