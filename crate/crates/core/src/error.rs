use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("root bracketing failed: {0}")]
    NonConvergence(String),
    #[error("exponent is not supercritical (largest root b = 0)")]
    SubcriticalInput,
    #[error("ODE step size underflow at s = {at}")]
    StepUnderflow { at: f64 },
    #[error("stopping rule not met within {budget} events")]
    HorizonOverflow { budget: usize },
    #[error("post-minimum requested on a path that did not reach its margin stop")]
    MinNotSettled,
    #[error("concatenation: non-final path has infinite lifetime")]
    InfiniteInterior,
    #[error("time {t} outside coding domain [0, {m}]")]
    OutOfDomain { t: f64, m: f64 },
    #[error("malformed Lukasiewicz path: {0}")]
    MalformedPath(String),
    #[error("invalid grafting site: {0}")]
    InvalidSite(String),
    #[error("tree is not truncated at {r}: node reaches {height}")]
    NotTruncated { r: f64, height: f64 },
    #[error("node budget {budget} exceeded (seed {seed})")]
    NodeBudgetExceeded { budget: usize, seed: u64 },
    #[error("epsilon {eps} below mesh resolution floor {floor}")]
    EpsilonBelowResolution { eps: f64, floor: f64 },
    #[error("height estimator requires a Grey-satisfying exponent (beta > 0)")]
    NonGrey,
    #[error("contour is not of finite variation")]
    NotFiniteVariation,
    #[error("level grid reaches {top} but truncation height is {r}")]
    GridExceedsTruncation { top: f64, r: f64 },
    #[error("simulation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("degenerate binning: {0}")]
    DegenerateBinning(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Fills in the seed of a budget error raised deep in a recursion.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Error::NodeBudgetExceeded { budget, .. } => Error::NodeBudgetExceeded { budget, seed },
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
