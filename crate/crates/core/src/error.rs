use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate deformation (excluded SU(2)/SU_-1(2) case): trace {0} <= 2")]
    DegenerateTrace(f64),

    #[error("excluded SU_{{±1}}(2) case: Tr(F*F) = {0}")]
    ExcludedCase(f64),

    #[error("not an A_o(F) datum: {0}")]
    NotAoF(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{z} is not in the fusion of {a} and {b}")]
    Fusion { a: usize, b: usize, z: usize },

    #[error("level {level} exceeds the cap {cap}")]
    LevelCap { level: usize, cap: usize },

    #[error("ambient dimension {dim} exceeds the cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("grid tuple {tuple:?} needs level {level}, above the cap {cap}")]
    GridCap { tuple: Vec<usize>, level: usize, cap: usize },

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unparseable F specification: {0}")]
    Spec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
