use alloc::string::String;

use crate::dsl::ParseError;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("scale {0} is not grid-admissible")]
    InadmissibleScale(f64),
    #[error("shift {0} is not a multiple of the grid step")]
    NonGridShift(f64),
    #[error("cutoff ladder: {0}")]
    Cutoff(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("division by a singular value")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogBranch,
    #[error("unbound variable `{0}`")]
    Unbound(&'static str),
    #[error("non-finite value during evaluation")]
    NonFinite,
    #[error("cannot differentiate through abs")]
    DiffAbs,
    #[error("not translation invariant: off-diagonal block norm {0:e}")]
    NotTranslationInvariant(f64),
    #[error("diffeomorphism derivative vanishes or changes sign near {0}")]
    DegenerateDiffeo(f64),
    #[error("symbol vanishes on the contour: min modulus {0:e}")]
    ZeroCrossing(f64),
    #[error("contour does not close: endpoint mismatch {0:e}")]
    NonClosing(f64),
    #[error("winding residual {0} exceeds 0.1")]
    WindingResidual(f64),
    #[error("compatibility mismatch {0:e} exceeds tolerance {1:e}")]
    Compatibility(f64, f64),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("need at least {0} samples")]
    TooFewSamples(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
