use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ROI side {side} m is not an integer multiple of pixel side {pixel} m")]
    NonDivisibleRoi { side: f64, pixel: f64 },

    #[error("target {index} does not lie inside the ROI")]
    TargetOutOfBounds { index: usize },

    #[error("antenna and scatterer coincide (distance {distance:e} m)")]
    CoincidentPoints { distance: f64 },

    #[error("antenna at ({x}, {y}) lies inside the integration rectangle")]
    AntennaInsidePixel { x: f64, y: f64 },

    #[error("antenna {index} is within one pixel diagonal of a pixel center")]
    AntennaTooClose { index: usize },

    #[error("quadrature did not converge: change {change:e} after {points} points per axis")]
    QuadratureNotConverged { points: usize, change: f64 },

    #[error("pilot sequence length {length} is shorter than the {n_tx} transmitters")]
    TooShortSequence { n_tx: usize, length: usize },

    #[error("pilot Gram matrix is ill-conditioned (condition number {condition:e})")]
    SingularPilots { condition: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("inconsistent block dimensions: {0}")]
    InconsistentBlockDims(String),

    #[error("input variance {0:e} is degenerate")]
    DegenerateVariance(f64),

    #[error("output variance sum is not positive")]
    ZeroVariance,

    #[error("GAMP diverged at iteration {iteration}")]
    NumericalDivergence { iteration: usize },

    #[error("ground truth has no {0} pixels; rate undefined")]
    DegenerateTruth(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("matrix file error: {0}")]
    MatrixFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonDivisibleRoi { .. } => "NonDivisibleROI",
            Error::TargetOutOfBounds { .. } => "TargetOutOfBounds",
            Error::CoincidentPoints { .. } => "CoincidentPoints",
            Error::AntennaInsidePixel { .. } => "AntennaInsidePixel",
            Error::AntennaTooClose { .. } => "AntennaTooClose",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::TooShortSequence { .. } => "TooShortSequence",
            Error::SingularPilots { .. } => "SingularPilots",
            Error::DimMismatch(_) => "DimMismatch",
            Error::InconsistentBlockDims(_) => "InconsistentBlockDims",
            Error::DegenerateVariance(_) => "DegenerateVariance",
            Error::ZeroVariance => "ZeroVariance",
            Error::NumericalDivergence { .. } => "NumericalDivergence",
            Error::DegenerateTruth(_) => "DegenerateTruth",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Config(_) => "ConfigError",
            Error::MatrixFormat(_) => "MatrixFormat",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
