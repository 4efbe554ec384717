use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported derivative order {0} (supported: 1..=5)")]
    UnsupportedOrder(u32),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("frame degenerate (curvature too small): {0}")]
    FrameDegenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsolvable system: mean/solvability residual {residual:.3e} ({detail})")]
    Unsolvable { residual: f64, detail: String },

    #[error("singular operator discretization: {0}")]
    SingularOperator(String),

    #[error("blow-up detected at step {step}, t = {time:.6e}")]
    BlowUp { step: usize, time: f64 },

    #[error("oracle unreliable: estimated stencil error {estimate:.3e} ({detail})")]
    OracleUnreliable { estimate: f64, detail: String },

    #[error("frame/matrix consistency failure: {0}")]
    Inconsistency(String),

    #[error("insufficient snapshots: need {needed}, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("missing invariant field `{0}`")]
    MissingInvariant(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("parse error at row {row}: {detail}")]
    Parse { row: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
