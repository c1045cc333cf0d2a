use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A transition matrix whose reachability graph is not strongly connected.
    #[error("transition matrix is not irreducible: {0}")]
    NotIrreducible(String),

    /// A constructor argument outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Power iteration exhausted its budget. Carries the last estimate.
    #[error("spectral radius iteration did not converge (partial estimate {estimate})")]
    NoConvergence { estimate: f64, iterations: usize },

    /// A Monte Carlo accumulation exceeded the representable range even in
    /// log space, which signals an explosive growth rate.
    #[error("overflow in Monte Carlo accumulation (growth rate far above 1)")]
    Overflow,

    /// A conditional moment that does not exist, e.g. a negative power of a
    /// discrete distribution with an atom at zero.
    #[error("undefined moment: {0}")]
    UndefinedMoment(String),

    /// An argument outside the domain of a utility function or policy.
    #[error("domain error: {0}")]
    DomainError(String),

    /// The Euler equation root was not bracketed. Unreachable for policies
    /// satisfying the monotonicity invariants.
    #[error("root bracketing failed at asset {asset}, state {state}")]
    RootBracketFailure { asset: f64, state: usize },

    /// Two policies defined on different grids were compared.
    #[error("policies are defined on different grids or state spaces")]
    GridMismatch,

    /// Time iteration hit its iteration cap. Carries the best iterate and
    /// the recorded distance trace.
    #[error("time iteration did not converge within {iterations} iterations (last distance {last_distance})")]
    NotConverged {
        policy: Box<crate::solver::Policy>,
        trace: Vec<f64>,
        iterations: usize,
        last_distance: f64,
    },

    /// A solve was requested for a specification that fails the optimality
    /// conditions.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// The income dominance pre-check could not be established.
    #[error("income dominance cannot be verified: {0}")]
    DominanceUnverifiable(String),

    /// Too few usable tail observations for the Hill estimator.
    #[error("insufficient tail data: {0}")]
    InsufficientTail(String),

    /// A long-run variance estimate that is not strictly positive.
    #[error("degenerate long-run variance (test functional is constant along the path)")]
    DegenerateVariance,

    /// Every state has asymptotic consumption slope one, so the wealth
    /// growth factor is identically zero.
    #[error("asymptotic consumption slope is 1 in every state")]
    DegenerateAlpha,

    /// Malformed input document (config, policy file, or panel file).
    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
