//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("Hermite index {requested} exceeds the supported maximum {max}")]
    HermiteDegreeOverflow { requested: usize, max: usize },
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("series expansion variables differ: {left:?} vs {right:?}")]
    RoleMismatch { left: crate::series::EpsilonRole, right: crate::series::EpsilonRole },
    #[error("shift series must vanish at epsilon = 0 (constant term is {constant:?})")]
    NonzeroConstantTerm { constant: String },
    #[error("{0}")]
    Contract(String),
}

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("expansion order must be at least 1 (got {0})")]
    OrderTooSmall(usize),
    #[error("need reduced cumulants c_1..c_{need}, got {got}")]
    MissingCumulants { need: usize, got: usize },
    #[error("asymptotic variance rate p_2 must be positive (got {0})")]
    DegenerateVariance(f64),
    #[error("order r = {r} exceeds m - 2 = {max}")]
    OrderBeyondTarget { r: usize, max: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("kernel row {row} of step {step} sums to {sum}, not 1")]
    RowNotStochastic { step: usize, row: usize, sum: f64 },
    #[error("initial distribution sums to {0}, not 1, or has negative mass")]
    BadInitialDistribution(f64),
    #[error("matrix dimensions are inconsistent at step {0}")]
    DimensionMismatch(usize),
    #[error("spec is declared centered but step {step} has mean {mean}")]
    NotCentered { step: usize, mean: f64 },
    #[error("operation requires a homogeneous chain")]
    NotHomogeneous,
    #[error("power iteration failed to converge within {iters} steps (spectral gap failure; chain may be periodic or reducible)")]
    SpectralGapFailure { iters: usize },
    #[error("moment generating function too close to zero on the tilt contour (|value| = {min_abs:.3e}); shrink the radius rho")]
    IllConditionedContour { min_abs: f64 },
    #[error("q_{k} estimates from two reference lengths differ by {diff:.3e} (no geometric regime)")]
    NoGeometricRegime { k: usize, diff: f64 },
    #[error("block scale A = {a} is below twice the maximal single-step variance {max_step_var}")]
    InvalidBlockScale { a: f64, max_step_var: f64 },
    #[error("observable values do not lie on a common lattice")]
    NotLattice,
    #[error("lattice dynamic program would need {needed} cells, budget is {budget}")]
    LatticeBudget { needed: usize, budget: usize },
    #[error("n = {n} exceeds the configured maximum {max}")]
    HorizonTooLarge { n: usize, max: usize },
    #[error("cumulant order j_max = {0} exceeds 8")]
    CumulantOrderTooLarge(usize),
    #[error("chain file parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum DistError {
    #[error("estimated inversion error {estimate:.3e} exceeds the requested tolerance {tolerance:.3e}")]
    InversionAccuracy { estimate: f64, tolerance: f64 },
    #[error("curve carries no tail model beyond its grid; weighted distances need one")]
    MissingTailModel,
    #[error("curve is not a genuine (monotone) distribution function; use wp_upper for generalized curves")]
    NotMonotone,
    #[error("total masses differ: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },
    #[error("curve text parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("{0}")]
    Contract(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("horizon n = {0} exceeds the generator capacity {1}")]
    Capacity(usize, usize),
    #[error("matrix {0} is singular")]
    SingularMatrix(usize),
    #[error("smoothing order m must be at least 2 (got {0})")]
    SmoothingOrderTooSmall(usize),
    #[error("rejection sampling efficiency {0:.4} fell below 1%; envelope does not fit")]
    EnvelopeMisfit(f64),
    #[error("probabilities sum to {0}, not 1")]
    BadProbabilities(f64),
    #[error("empty sample batch")]
    EmptyBatch,
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("unknown built-in model '{0}'")]
    UnknownModel(String),
    #[error("n-sweep must be strictly increasing")]
    BadSweep,
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
