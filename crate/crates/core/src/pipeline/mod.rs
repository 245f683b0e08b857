//! End-to-end study driver.
//!
//! [`run_ensemble`] generates networks, computes their features and runs
//! one dissolution simulation per (network, rate constant) job, then merges
//! everything into a single dataset CSV. [`train_models`] fits the nested
//! feature-set models and the per-rate models on that dataset, and
//! [`write_report`] renders the resulting [`StudyReport`] as CSV tables and
//! SVG plots.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! manifest.json                 accepted network seeds + simulation hash
//! networks/net_0007/network.json
//! networks/net_0007/graph.txt   edge list with s/t markers
//! networks/net_0007/features.csv
//! sims/net_0007_k0/{result.csv,history.csv,flow.csv,meta.json}
//! dataset.csv
//! ensemble_summary.json
//! report/...
//! ```

mod config;
mod ensemble;
mod report;
mod table;
mod train;

pub use config::{
    feature_set, StudyConfig, GEOMETRIC, HYDROLOGICAL, STUDY_RATE_CONSTANTS, TOPOLOGICAL,
};
pub use ensemble::{
    compute_network_features, generate_networks, run_ensemble, write_feature_tables, EnsembleSummary,
    NetworkFeatures, NetworkRecord, SimFailure, SimMeta,
};
pub use report::write_report;
pub use table::{FeatureTable, DATASET_COLUMNS, DATASET_SCHEMA_VERSION, TARGET};
pub use train::{train_models, ModelScore, RateModel, StudyReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Data(String),
    #[error(transparent)]
    Dfn(#[from] crate::dfn::DfnError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Pipe(#[from] crate::pipe::PipeError),
    #[error(transparent)]
    Forest(#[from] crate::forest::ForestError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("no network could be generated in {0} attempts")]
    NoNetworks(usize),
}
