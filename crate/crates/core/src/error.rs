use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vector has zero or non-finite norm")]
    ZeroVector,
    #[error("cap height {0} outside [-1, 1]")]
    HeightOutOfRange(f64),
    #[error("degenerate configuration: points coincide or are collinear")]
    Degenerate,
    #[error("antipodal points do not determine a diametral cap")]
    Antipodal,
}

/// Reasons a [`crate::ensemble::ModelSpec`] is rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("M must be at least 1, got {0}")]
    MTooSmall(i64),
    #[error("expected n = {n} pieces with n+1 breakpoints; got {t} breakpoints, {alpha} alphas, {beta} betas")]
    ArityMismatch {
        n: usize,
        t: usize,
        alpha: usize,
        beta: usize,
    },
    #[error("breakpoints must start at 0 and end at M = {m}; got [{first}, .., {last}]")]
    BreakpointEnds { m: i64, first: i64, last: i64 },
    #[error("breakpoints must be strictly increasing (t[{index}] = {value})")]
    NonMonotoneBreakpoints { index: usize, value: i64 },
    #[error("alpha_1 must be 0, got {0}")]
    AlphaOneNonzero(i64),
    #[error("beta_1 must be positive, got {0}")]
    BetaOneNonPositive(i64),
    #[error("{name}_{piece} must be non-negative, got {value}")]
    NegativeCoefficient {
        name: &'static str,
        piece: usize,
        value: i64,
    },
    #[error("r(x) is discontinuous at breakpoint t_{index} = {at}: {left} != {right}")]
    Discontinuity {
        index: usize,
        at: i64,
        left: i64,
        right: i64,
    },
    #[error("theta list must have {expected} entries (one per parallel), got {got}")]
    ThetaLength { expected: usize, got: usize },
    #[error("theta value {0} outside [0, 2pi]")]
    ThetaOutOfRange(f64),
    #[error("total point count exceeds 2^53")]
    TooLarge,
    #[error("parallel index {j} outside 1..={max}")]
    IndexOutOfRange { j: usize, max: usize },
}

impl ModelError {
    /// Stable short code for scripting.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::MTooSmall(_) => "m-too-small",
            ModelError::ArityMismatch { .. } => "arity-mismatch",
            ModelError::BreakpointEnds { .. } => "breakpoint-ends",
            ModelError::NonMonotoneBreakpoints { .. } => "non-monotone-breakpoints",
            ModelError::AlphaOneNonzero(_) => "alpha1-nonzero",
            ModelError::BetaOneNonPositive(_) => "beta1-non-positive",
            ModelError::NegativeCoefficient { .. } => "negative-coefficient",
            ModelError::Discontinuity { .. } => "discontinuity",
            ModelError::ThetaLength { .. } => "theta-length",
            ModelError::ThetaOutOfRange(_) => "theta-out-of-range",
            ModelError::TooLarge => "too-large",
            ModelError::IndexOutOfRange { .. } => "index-out-of-range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("collar index {j} outside 1..={max}")]
    IndexOutOfRange { j: usize, max: usize },
    #[error("point set has {got} points, partition has {expected} regions")]
    SizeMismatch { expected: usize, got: usize },
    #[error("interleaving fails at parallel {j}: {detail}")]
    Interleaving { j: usize, detail: String },
    #[error("point {point} lies in region {found}, expected region {expected}")]
    Misplaced {
        point: usize,
        found: usize,
        expected: usize,
    },
    #[error("region {region} contains {count} points")]
    NotBijective { region: usize, count: usize },
    #[error("point {0} carries no ensemble provenance")]
    MissingProvenance(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("exact sup discrepancy limited to N <= {limit} (got N = {n})")]
    SizeLimit { n: usize, limit: usize },
    #[error("Stolarsky radicand {0} is negative beyond round-off")]
    NegativeRadicand(f64),
    #[error("riesz exponent must be positive, got {0}")]
    InvalidExponent(f64),
    #[error("covering grid needs at least {needed} directions, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("quadrature grid must be non-empty")]
    EmptyGrid,
}
