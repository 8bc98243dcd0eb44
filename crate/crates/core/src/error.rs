use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("points {0} and {1} coincide within eps_zero")]
    DuplicatePoint(usize, usize),

    #[error("degenerate hyperplane: normal norm {0:e} is not above eps_zero")]
    DegenerateNormal(f64),

    #[error("rank-deficient basis: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("hyperplane list is empty")]
    EmptyHyperplaneList,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("no acceptable perturbation at inductive step {step} after {retries} retries")]
    RetriesExhausted { step: usize, retries: usize },

    #[error("construction failed at layer {layer}: {source}")]
    LayerConstruction {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid encoder spec: {0}")]
    InvalidSpec(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid polytope cover: {0}")]
    InvalidCover(String),

    #[error("insufficient input dimension: m = {m}, but {polytopes} polytopes with {faces} faces need m > {required}")]
    InsufficientDimension {
        m: usize,
        required: usize,
        polytopes: usize,
        faces: usize,
    },

    #[error("encoder is not bijective on the dataset ({0} colliding pairs)")]
    NotBijective(usize),

    #[error("hyperplane normal lies in the row space of the layer")]
    NormalInRowSpace,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid convolution spec: {0}")]
    InvalidConv(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Layer index (1-based) for construction failures, if any.
    pub fn failing_layer(&self) -> Option<usize> {
        match self {
            Error::LayerConstruction { layer, .. } => Some(*layer),
            _ => None,
        }
    }
}
