//! Data-adaptive maps between classes of high-dimensional points.
//!
//! The crate builds a metric between survey-style respondents by alternating
//! diffusion embeddings and partition trees on the rows and columns of a data
//! matrix (bigeometric organization), computes a linear-time tree-approximated
//! earth mover's distance between classes of respondents, embeds the classes
//! through the leading eigenvectors of the resulting affinity kernel, and
//! validates the map against external class-level covariates with a
//! permutation test.
//!
//! The main entry points, in pipeline order:
//!
//! * [`data`] — CSV ingestion, normalization, synthetic data, class partitioning.
//! * [`bigeometric`] — the alternating organization driver producing the point
//!   metric, point embedding, and point partition tree.
//! * [`tree_emd`] — folder profiles, class histograms, and the multiscale
//!   tree EMD plus derived affinity kernels.
//! * [`exact_emd`] — an exact transportation solver used as the ground-truth
//!   oracle for the tree approximation.
//! * [`class_analysis`] — class kernel, eigenvector embedding, `error(f)`
//!   statistic, permutation test, residual outliers.
//! * [`pipeline`] — end-to-end orchestration with deterministic artifacts.
//!
//! All numeric code is generic over a floating-point [`Scalar`]; the aliases
//! at the crate root fix `f64`, which is what the CLI and the test suite use.

pub mod bigeometric;
pub mod class_analysis;
pub mod data;
pub mod diffusion;
pub mod eval;
pub mod exact_emd;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod tree;
pub mod tree_emd;

use thiserror::Error;

pub use scalar::Scalar;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: u64, msg: String },

    #[error("label column '{0}' not found")]
    LabelColumnNotFound(String),

    #[error("non-numeric feature cell at row {row}, column '{column}': {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate point id '{0}'")]
    DuplicatePointId(String),

    #[error("data matrix too small: need at least 2 points and 2 features, got {n} x {m}")]
    MatrixTooSmall { n: usize, m: usize },

    #[error("feature '{0}' has fewer than 2 observed values")]
    EmptyFeature(String),

    #[error("no classes retained: all {0} classes fall below the size threshold")]
    NoClassesRetained(usize),

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),

    #[error("degenerate bandwidth: median of retained pairwise distances is zero")]
    DegenerateBandwidth,

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("point {0} is isolated: its affinity row sums to zero")]
    IsolatedPoint(usize),

    #[error("embedding dimension {d} out of range for a set of {n} elements")]
    DimensionOutOfRange { d: usize, n: usize },

    #[error("eigensolver did not converge: residual {0:e}")]
    EigenNoConvergence(f64),

    #[error("invalid partition tree: {0}")]
    InvalidTree(String),

    #[error("mismatched trees: {0}")]
    TreeMismatch(String),

    #[error("level selection resolves to no levels for a tree of depth {0}")]
    EmptyLevelSelection(usize),

    #[error("level {level} out of range for a tree of depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("empty class '{0}'")]
    EmptyClass(String),

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("invalid transport instance: {0}")]
    InvalidTransport(String),

    #[error("unbalanced masses: sum(p) = {0}, sum(q) = {1}")]
    UnbalancedMasses(f64, f64),

    #[error("positions must be strictly increasing")]
    UnsortedPositions,

    #[error("covariate has zero norm")]
    ZeroCovariate,

    #[error("covariate '{covariate}' missing value for class '{class_id}'")]
    MissingCovariateValue { covariate: String, class_id: String },

    #[error("non-finite distance encountered in iteration {0}")]
    NonFiniteDistance(usize),

    #[error("element counts differ: {0} vs {1}")]
    ElementCountMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing artifact '{0}': run the producing stage first")]
    MissingArtifact(String),

    #[error("unknown export target '{0}'")]
    UnknownExport(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Tag an error with the pipeline stage it aborted.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

// Concrete `f64` aliases for the generic core types. `f32` variants carry a
// `32` suffix; the unsuffixed names are what the CLI and pipeline use.
pub type DataMatrix = data::DataMatrix<f64>;
pub type DataMatrix32 = data::DataMatrix<f32>;
pub type AffinityMatrix = diffusion::AffinityMatrix<f64>;
pub type AffinityMatrix32 = diffusion::AffinityMatrix<f32>;
pub type MarkovOperator = diffusion::MarkovOperator<f64>;
pub type DiffusionEmbedding = diffusion::DiffusionEmbedding<f64>;
pub type FolderWeights = tree::FolderWeights<f64>;
pub type FolderProfile = tree_emd::FolderProfile<f64>;
pub type ClassHistogram = tree_emd::ClassHistogram<f64>;
pub type TransportInstance = exact_emd::TransportInstance<f64>;
pub type OrganizationState = bigeometric::OrganizationState<f64>;
pub type ClassEmbedding = class_analysis::ClassEmbedding<f64>;
pub type ValidationReport = class_analysis::ValidationReport<f64>;
