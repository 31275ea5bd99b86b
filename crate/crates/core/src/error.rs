use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),

    #[error("degenerate chart: omega = 0 so phi is undefined")]
    DegenerateChart,

    #[error("coefficients are not normalized (sum of |eta|^2 = {0})")]
    NotNormalized(f64),

    #[error("all coefficients vanish")]
    ZeroState,

    #[error("stationary eigenstate: only eta{0} is nonzero, the orbit is a single point")]
    Stationary(usize),

    #[error("|eta{index}| = {magnitude:e} sits within tolerance of the zero threshold {tol:e}; use a tighter tol")]
    AmbiguousClassification { index: usize, magnitude: f64, tol: f64 },

    #[error("requested case {requested} but the coefficients classify as {found}")]
    CaseMismatch { requested: String, found: String },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi sweeps did not converge (off-diagonal norm {0:e})")]
    NoConvergence(f64),

    #[error("perturbation theory breaks down: denominator {name} = {value:e} is below the resonance threshold")]
    Resonance { name: &'static str, value: f64 },

    #[error("coordinate vector has length {got}, chart expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite derivative along coordinate `{0}`")]
    ChartSingular(String),

    #[error("metric is singular (smallest eigenvalue {0:e})")]
    SingularMetric(f64),

    #[error("diagonalizing transform is singular: {0} vanishes")]
    TransformSingular(&'static str),

    #[error("closed form undefined: factor {0} vanishes")]
    Domain(&'static str),

    #[error("case assumptions violated: {0}")]
    AssumptionViolated(String),

    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True when the error stems from bad input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::DegenerateChart
                | Error::NotNormalized(_)
                | Error::ZeroState
                | Error::Stationary(_)
                | Error::AmbiguousClassification { .. }
                | Error::CaseMismatch { .. }
                | Error::DimensionMismatch { .. }
                | Error::AssumptionViolated(_)
                | Error::UnsupportedChart(_)
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
