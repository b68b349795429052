use thiserror::Error;

use crate::dmap::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("cannot multiply two vector-valued polynomials (dimensions {0} and {1})")]
    VectorProduct(usize, usize),

    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLength { expected: usize, got: usize },

    #[error("polynomial dimension must be positive")]
    ZeroDimension,

    #[error("malformed rational {0:?}: expected an integer or \"a/b\" with b > 0")]
    MalformedRational(String),

    #[error("geometry map must be R^2-valued, got dimension {0}")]
    GeometryDimension(usize),

    #[error("geometry map is the zero polynomial")]
    ZeroGeometry,

    #[error("not a D-map: {}", .0.summary())]
    NotDMap(Box<ValidationReport>),

    #[error("field polynomial must be scalar, got dimension {0}")]
    FieldDimension(usize),

    #[error("reduced field must satisfy w20 = w02 = 0")]
    NotReduced,

    #[error("exponent p = {0} is outside [1, inf)")]
    InvalidExponent(String),

    #[error("p-range is undefined for r = {r}, ell = {ell} (needs r < 3*ell)")]
    UndefinedRange { r: u32, ell: u32 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("term u^{j} v^{k} lies outside the coefficient space")]
    OutsideSpace { j: u32, k: u32 },

    #[error("field violates the C1 conditions: {0}")]
    C1Violated(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("truncation depth j_max = {0} is too small (need at least {1})")]
    TruncationDepth(u32, u32),
}
