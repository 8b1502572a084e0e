//! Monte Carlo batches, taxonomy aggregation, and parameter sensitivity.

pub mod batch;
pub mod sensitivity;
pub mod summary;
pub mod taxonomy;

use thiserror::Error;

pub use batch::{load_batch, run_batch, BatchManifest, ManifestEntry};
pub use sensitivity::{sensitivity, FeatureFn, ParamName, SensitivityEstimate, SensitivityOptions};
pub use summary::{
    profile_presence, radar_export, summarize, summarize_with, weight_stats, BatchSummary,
    RadarRow, RadarValues,
};
pub use taxonomy::{Classification, Taxonomies, Taxonomy, UNCATEGORIZED};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("batch is empty (no non-dropped runs)")]
    EmptyBatch,
    #[error("no manifest at {0}")]
    MissingManifest(String),
    #[error("output directory {0} already holds a batch (pass force to overwrite)")]
    WouldOverwrite(String),
    #[error("run {0} has no evaluation")]
    MissingEvaluation(String),
    #[error("infeasible direction: {0}")]
    InfeasibleDirection(String),
    #[error("sensitivity needs at least 2 replicates (got {0})")]
    InsufficientReplicates(usize),
    #[error("step must be non-zero")]
    ZeroStep,
    #[error("unknown parameter {0} (team_size|delphi_rounds|brainstorm_minutes|budget_m_cad)")]
    UnknownParameter(String),
    #[error("unknown feature {0} (mean_weight:<category>|presence:<category>|winning_total)")]
    UnknownFeature(String),
    #[error("invalid taxonomy: {0}")]
    InvalidTaxonomy(String),
    #[error(transparent)]
    Mcda(#[from] crate::mcda::McdaError),
}
