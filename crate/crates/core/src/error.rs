use thiserror::Error;

/// Errors raised by the solver and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("species index {index} out of range for a {n}-species model")]
    SpeciesIndex { index: usize, n: usize },

    #[error("interaction matrix is singular; no homogeneous equilibrium")]
    SingularInteraction,

    #[error("no strictly positive equilibrium: {0:?}")]
    NonPositiveEquilibrium(Vec<f64>),

    #[error("coupling condition inapplicable: species {0} has no instantaneous self-limitation")]
    NoInstantaneousWeight(usize),

    #[error("speed {speed} is below the threshold {threshold} (complex decay rates)")]
    BelowThreshold { speed: f64, threshold: f64 },

    #[error("admissible shape interval is degenerate (upper end {upper_end})")]
    DegenerateShapeInterval { upper_end: f64 },

    #[error("shape parameter {eta} is inadmissible for species {species} (denominator {denominator})")]
    InadmissibleShape { eta: f64, species: usize, denominator: f64 },

    #[error("shift constant {beta} failed the monotonicity audit (worst slope {worst_slope})")]
    BetaAudit { beta: f64, worst_slope: f64 },

    #[error("profile leaves the audited box for species {species}: value {value}, bound {bound}")]
    OutsideBox { species: usize, value: f64, bound: f64 },

    #[error("unsupported model for this operation: {0}")]
    Unsupported(&'static str),

    #[error("rectangle family is not contracting: {0}")]
    NotContracting(String),

    #[error("limit hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("time step {dt} violates the diffusion stability bound; use dt <= {suggested}")]
    Stability { dt: f64, suggested: f64 },

    #[error("non-finite value at t = {t}, species {species}, x = {x}")]
    NonFinite { t: f64, species: usize, x: f64 },

    #[error("no front: level {level} never crossed")]
    NoFront { level: f64 },

    #[error("boundary contamination: {0}")]
    Contaminated(String),

    #[error("operation inapplicable: {0}")]
    Inapplicable(String),
}

pub type Result<T> = std::result::Result<T, WaveError>;
