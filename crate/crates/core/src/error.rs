use thiserror::Error;

/// Errors produced anywhere in the subsampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("{op}: dimension mismatch, expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("svd did not converge for a {rows} x {cols} matrix after {sweeps} sweeps")]
    SvdNoConvergence {
        rows: usize,
        cols: usize,
        sweeps: usize,
    },

    #[error("singular sampling operator (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("singular sampling operator A_S T for selected nodes {selected:?} (condition estimate {condition:e})")]
    SingularSamplingOperator {
        condition: f64,
        selected: Vec<usize>,
    },

    #[error("invalid graph template: {0}")]
    InvalidTemplate(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {0} is isolated (zero degree), normalized Laplacian undefined")]
    IsolatedNode(usize),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid signal spec: {0}")]
    InvalidSignal(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("all singular values are zero, nothing to sample")]
    ZeroSpectrum,

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("singular values must be finite, nonnegative and nonincreasing")]
    UnsortedSpectrum,

    #[error("rank {rank} out of range for {n} nodes")]
    InvalidRank { rank: usize, n: usize },

    #[error("selection yields rank-deficient row block for nodes {selected:?} (sigma_min/sigma_max = {ratio:e})")]
    RankDeficientRowBlock { selected: Vec<usize>, ratio: f64 },

    #[error("factor T is rank deficient (sigma_min/sigma_max = {ratio:e})")]
    RankDeficientFactor { ratio: f64 },

    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("node index {0} selected more than once")]
    DuplicateIndex(usize),

    #[error("empty selection")]
    EmptySelection,

    #[error("signal has zero energy, normalized error is undefined")]
    ZeroSignal,

    #[error("exhaustive selection refused for {n} nodes (limit {limit}); use greedy selection")]
    BruteForceTooLarge { n: usize, limit: usize },

    #[error("no subset of size {rank} yields an invertible sampling operator")]
    NoFeasibleSubset { rank: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("stage `{stage}` failed: {source}")]
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
    /// Attach a pipeline stage name.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by configuration or template validation.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidConfig(_)
                | Error::InvalidTemplate(_)
                | Error::InvalidGenerator(_)
                | Error::InvalidSignal(_)
                | Error::InvalidEpsilon(_)
                | Error::Json(_)
        )
    }

    /// True for numerical failures: singular operators, SVD breakdown, rank loss.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::SvdNoConvergence { .. }
                | Error::SingularSystem { .. }
                | Error::SingularSamplingOperator { .. }
                | Error::RankDeficientRowBlock { .. }
                | Error::RankDeficientFactor { .. }
                | Error::NoFeasibleSubset { .. }
                | Error::ZeroSpectrum
                | Error::IsolatedNode(_)
                | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
