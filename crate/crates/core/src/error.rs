use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value while evaluating {what} at {at:?}")]
    Evaluation { what: String, at: Vec<f64> },

    #[error("point outside the domain ({reason}) at {at:?}")]
    Domain { reason: String, at: Vec<f64> },

    #[error("integration failed at t = {last_time}: {reason}")]
    Integration { reason: String, last_time: f64 },

    #[error("chart evaluation failed at parameters {params:?}: {source}")]
    ChartEvaluation {
        params: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("nested bracket of depth {0} is not supported (max 3)")]
    UnsupportedDepth(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no intersection with the energy surface: {0}")]
    NoIntersection(String),

    #[error("glancing point detected at parameters {params:?}; use the normal-form module")]
    GlancingDetected { params: Vec<f64> },

    #[error("chart breaks down at parameters {params:?}: {reason}")]
    ChartBreakdown { params: Vec<f64>, reason: String },

    #[error("not a glancing configuration: {0}")]
    NotGlancing(String),

    #[error("defining functions do not Poisson-commute: {{f1,f2}}(z) = {0}")]
    NotLagrangian(f64),

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("density vanishes (determinant {0:e})")]
    DensityDegenerate(f64),

    #[error("caustic crossed: {0}")]
    Caustic(String),

    #[error("outside the validity domain: {0}")]
    ValidityDomain(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn at_params(self, params: &[f64]) -> Error {
        match self {
            e @ Error::ChartEvaluation { .. } => e,
            e => Error::ChartEvaluation {
                params: params.to_vec(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
