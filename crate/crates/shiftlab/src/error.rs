use thiserror::Error;

/// Errors surfaced by the numerical toolkit.
///
/// Every variant corresponds to a guarded precondition or a diagnosed
/// failure of an iterative procedure; none are panics in disguise.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("series centers differ: {0} vs {1}")]
    CenterMismatch(f64, f64),
    #[error("inner series value {inner_value} does not match outer center {outer_center}")]
    CompositionMismatch { inner_value: f64, outer_center: f64 },
    #[error("root-test window {window} exceeds series order {order}")]
    WindowTooLarge { window: usize, order: usize },
    #[error("root-test window {0} is below the minimum of 8")]
    WindowTooSmall(usize),
    #[error("series order {order} too short, need at least {needed}")]
    JetTooShort { order: usize, needed: usize },

    #[error("root refinement failed to converge near t = {0}")]
    NoConvergence(f64),
    #[error("orbit left the evaluator domain at t = {0}")]
    DomainEscape(f64),
    #[error("map is not a lift of a circle map of period {period}: defect {defect}")]
    NotPeriodicLift { period: f64, defect: f64 },
    #[error("map is not nondecreasing: derivative {deriv} at t = {t}")]
    NotMonotone { t: f64, deriv: f64 },
    #[error("basin test inconclusive after {0} iterations")]
    InconclusiveBudget(usize),

    #[error("polynomial index {n} exceeds configured cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("partial derivative oracle has no value for (i, j) = ({0}, {1})")]
    OracleGap(usize, usize),

    #[error("multiplier {0} is within the neutral band around |lambda| = 1")]
    NeutralMultiplier(f64),
    #[error("zeta iteration failed to contract: sweep gap ratio {0}")]
    NoContraction(f64),
    #[error("lambda = {0} is below the zeta-iteration floor {1}")]
    LambdaBelowFloor(f64, f64),

    #[error("Taylor coefficient magnitude exceeded 1e300 at index {0}")]
    CoefficientOverflow(usize),
    #[error("leading delay coefficient beta_0 = {0} is degenerate (|beta_0| < 1e-12)")]
    DegenerateLeadingCoefficient(f64),
    #[error("multiplier lambda = {0} is not expansive (|lambda| <= 1)")]
    NotExpansive(f64),
    #[error("w-sequence tail gap {tail_gap} above tolerance at maximum order {n_max}")]
    NonConvergence { tail_gap: f64, n_max: usize },

    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("power iteration produced a nonpositive sample at node {0}")]
    PositivityLost(usize),
    #[error("eigen iteration did not converge in {0} iterations")]
    EigenNoConvergence(usize),
    #[error("branch m = {m} does not fix t0 = {t0}: eta(t0) - t0 = {defect}")]
    BranchNotFixed { m: i64, t0: f64, defect: f64 },
    #[error("samples of {0} must be strictly positive")]
    NotPositive(&'static str),
    #[error("jet unavailable for sampled profile without spectral data")]
    JetUnavailable,

    #[error("tau = {tau} exceeds the jet accuracy radius (tail root {tail})")]
    JetRadiusExceeded { tau: f64, tail: f64 },
    #[error("layer depth too small: Richardson disagreement {0}")]
    DepthTooSmall(f64),
    #[error("matching system is singular: determinant {0}")]
    SingularMatching(f64),
    #[error("four-corner quadrant test failed at tau = {0}")]
    QuadrantTestFailed(f64),

    #[error("lambda = {0} must exceed 2 for the tail bound to be finite")]
    LambdaTooSmall(f64),
    #[error("infeasible configuration: {0}")]
    ConfigInfeasible(String),

    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
