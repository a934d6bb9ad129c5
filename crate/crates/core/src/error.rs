use thiserror::Error;

use crate::algebra::RationalFn;
use crate::Complex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("rational function has a pole at {0}")]
    PoleAt(Complex),

    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("numerator and denominator share the root {0}")]
    CommonFactor(Complex),

    #[error("degenerate Möbius map (|ad - bc| = {0:e})")]
    DegenerateMobius(f64),

    #[error("parse error at byte {offset}: expected one of {}", expected.join(", "))]
    Parse {
        offset: usize,
        expected: Vec<&'static str>,
    },

    #[error("expression at byte {offset} is not rational in u (u appears in an exponent)")]
    NonRational { offset: usize },

    #[error("series division by a series with vanishing leading coefficient")]
    DivisionByZeroSeries,

    #[error("no provable coefficient at exponent {0}")]
    EmptyTruncation(i32),

    #[error("derivative of the series vanishes to truncation order")]
    ConstantSeries,

    #[error("evaluation point {0} is too close to a pole")]
    PoleProximity(Complex),

    #[error("argument reduction did not reach the series disc after {0} halvings")]
    ReductionDepthExceeded(usize),

    #[error("invalid solution family: {0}")]
    InvalidFamily(&'static str),

    #[error("u' vanishes at the evaluation point")]
    CriticalPoint,

    #[error("finite-difference extrapolation is unstable (relative spread {0:e})")]
    UnstableStencil(f64),

    #[error("no dominant balance found")]
    NoBalanceFound,

    #[error("resonance condition fails at index {0}")]
    ResonanceObstruction(i32),

    #[error("indicial interpolation disagrees with the check sample by {0:e}")]
    InterpolationUnstable(f64),

    #[error("the constant L must be nonzero")]
    ZeroL,

    #[error("series has {have} provable coefficients, fit needs {need}")]
    InsufficientTerms { have: usize, need: usize },

    #[error("no exact rational fit (relative residual {residual:e})")]
    NoExactFit {
        residual: f64,
        best: Box<RationalFn>,
    },

    #[error("invariant matching failed: {0}")]
    InvariantMatch(&'static str),

    #[error("correspondence broken at row {0}")]
    CorrespondenceBroken(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}
