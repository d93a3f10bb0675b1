use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("contact condition fails at {point:?}: β∧(dβ)^n density {det:e}")]
    SingularForm { point: Vec<f64>, det: f64 },

    #[error("restricted dβ is singular at {point:?}: |det| = {det:e}")]
    SingularSymplectic { point: Vec<f64>, det: f64 },

    #[error("no interior point found after {draws} draws")]
    EmptyDomain { draws: usize },

    #[error("integration step underflow at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("trajectory did not leave the domain within max_time = {max_time}")]
    Trapped { max_time: f64 },

    #[error("tangency order undecidable at {point:?}: tower {tower:?}")]
    AmbiguousTangency { point: Vec<f64>, tower: Vec<f64> },

    #[error("start point {point:?} lies outside the domain (h = {h:e})")]
    OutsideDomain { point: Vec<f64>, h: f64 },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    ResolutionTooLow { estimate: f64, tolerance: f64 },

    #[error("no chart available for {0}")]
    MissingChart(String),

    #[error("contact condition violated at t = {t}: min density {min_value:e}")]
    ContactViolated { t: f64, min_value: f64 },

    #[error("boundary map is not compatible with the boundary data: {0}")]
    IncompatibleBoundaryMap(String),

    #[error("f value {f} outside chord range [{lo}, {hi}]")]
    OutOfChordRange { f: f64, lo: f64, hi: f64 },

    #[error("shadow is not Lagrangian: lift depends on path (mismatch {mismatch:e})")]
    NonLagrangianShadow { mismatch: f64 },

    #[error("embedding incompatible: {0}")]
    IncompatibleEmbedding(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors raised by a numerical rank or tangency decision
    /// rather than by malformed input.
    pub fn is_ambiguity(&self) -> bool {
        matches!(
            self,
            Error::AmbiguousTangency { .. }
                | Error::StepFailure { .. }
                | Error::Trapped { .. }
                | Error::ResolutionTooLow { .. }
        )
    }
}
