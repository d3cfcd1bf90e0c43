use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed rational `{0}`")]
    MalformedRational(String),
    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),
    #[error("expected {expected} atom image pairs, found {found}")]
    AtomCountMismatch { expected: usize, found: usize },
    #[error("atom {atom} is degenerate (equal breakpoints)")]
    DegenerateAtom { atom: usize },
    #[error("atom {atom} has zero slope")]
    ZeroSlope { atom: usize },
    #[error("atom {atom} maps an endpoint to {value}, outside [0,1]")]
    ImageOutOfRange { atom: usize, value: Rational },
    #[error("point {0} lies outside [0,1]")]
    PointOutOfRange(Rational),
    #[error("side {side} is not allowed at x = {x}")]
    IllegalSide { x: Rational, side: &'static str },

    #[error("depth {requested} exceeds the enumeration cap {cap}")]
    DepthCapExceeded { requested: usize, cap: usize },
    #[error("no cycle detected within {cap} steps")]
    NoCycleWithinCap { cap: usize },

    #[error("not a Markov map: atom {atom} has endpoint image {image}, which is not a breakpoint")]
    NotMarkov { atom: usize, image: Rational },
    #[error("map is not expanding (atom {atom} has |slope| <= 1)")]
    NotExpanding { atom: usize },
    #[error("map is not transitive (transition matrix is reducible)")]
    NotTransitive,

    #[error("gamma must lie strictly between 0 and 1, got {0}")]
    GammaOutOfRange(Rational),
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("cycle fails verification at index {index}")]
    CycleVerification { index: usize },

    #[error("divergence hypotheses not satisfied: {0}")]
    HypothesesNotSatisfied(String),
    #[error("no periodic witness found with word length <= {cap}")]
    NoCycleFound { cap: usize },

    #[error("no interior preimage of a singular point within depth {cap}; try a depth of at least {suggested}")]
    NoWitnessWithinCap { cap: usize, suggested: usize },
    #[error("degenerate exceptional polynomial: {0}")]
    DegeneratePolynomial(String),
    #[error("exceptional polynomial degree {degree} exceeds the bound {bound}: {detail}")]
    DegreeBoundExceeded {
        degree: usize,
        bound: usize,
        detail: String,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("map document: {0}")]
    Document(String),
}

impl Error {
    /// True for failures that indicate an internal inconsistency rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::DegeneratePolynomial(_) | Error::DegreeBoundExceeded { .. } | Error::Internal(_)
        )
    }
}
