use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("q = exp({theta} i) is too close to a root of unity (denominator {denominator})")]
    RootOfUnity { theta: f64, denominator: u32 },

    #[error("double sine argument {x} lies within the guard distance of a {kind} at lattice point ({a}, {b})")]
    LatticeProximity {
        x: String,
        kind: &'static str,
        a: i64,
        b: i64,
    },

    #[error("{context}: {source}")]
    Kernel {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("R-matrix factor j = {j} is within the guard distance of its pole")]
    RMatrixPole { j: usize },

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("coproduct action leaves the truncated space (degree > {max_degree})")]
    TruncationOverflow { max_degree: usize },

    #[error("integral outside its region of convergence: {0}")]
    Divergent(String),

    #[error("contour deformation required; out of scope ({0})")]
    ContourDeformationRequired(String),

    #[error("dimension {dim} exceeds the quadrature limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

impl Error {
    pub(crate) fn in_context(self, context: impl Into<String>) -> Self {
        Error::Kernel {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
