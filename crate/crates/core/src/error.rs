use thiserror::Error;

/// Errors raised across the planning pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be even and at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("obstacles 1 and 2 coincide; the base direction is undefined")]
    DegenerateBase,

    #[error("parameter {0} is outside [0, 1]")]
    OutOfDomain(f64),

    #[error("configuration is not admissible: {0}")]
    NotInTotalSpace(String),

    #[error("projections are numerically ambiguous: gap {gap:e} lies in the refusal band ({tol:e}, {band:e})")]
    NumericallyDegenerate { gap: f64, tol: f64, band: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("single-robot scene violates its admissibility conditions: {0}")]
    NotInOmega(String),

    #[error("no robot projection pair is available to define delta")]
    NotApplicable,

    #[error("configuration is already nondegenerate; desingularization not needed")]
    NotNeeded,

    #[error("configuration is not in a nondegenerate stratum (t = {t}, rn = {rn})")]
    NotCore { t: usize, rn: usize },

    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),

    #[error("scenario and trajectory shapes disagree: {0}")]
    ShapeMismatch(String),

    #[error("scenario generation failed after {0} attempts")]
    GenerationFailed(usize),

    #[error("perturbation left the stratum: {from} -> {to}")]
    StratumEscaped { from: String, to: String },

    #[error("no closed form for clearance between robots {0} and {1} on [{2}, {3}]")]
    NonAnalyticPair(usize, usize, f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
