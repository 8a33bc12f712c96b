use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Variants carry enough context to be reported verbatim by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("invalid external angle: {0}")]
    InvalidAngle(String),
    #[error("iterate escaped |x| > {bound:e} at step {step}")]
    Overflow { step: usize, bound: f64 },
    #[error("preimage is a double root (y = lambda/4)")]
    DegenerateBranch,
    #[error("Newton iteration did not converge: {0}")]
    NewtonDiverged(String),
    #[error("periodic point is not repelling: |w| = {0}")]
    NotRepelling(f64),
    #[error("orbits merged with different multipliers: {0}")]
    DedupFailure(String),
    #[error("series has a vanishing leading coefficient or incompatible index: {0}")]
    IncompatibleIndex(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("point {0} is outside the unit disk domain of phi")]
    OutOfDomain(String),
    #[error("resonance |w^n - w| < 1e-12 at order {0}")]
    ResonanceFailure(usize),
    #[error("phi - L exceeds the certified inversion radius: {0}")]
    OutsideInversionRadius(String),
    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no inverse-branch address reproduces phi: {0}")]
    BranchSelectionFailure(String),
    #[error("every angle was excluded; nothing left to interpolate")]
    EmptyComplement,
    #[error("bisection has no bracket: A(0) = {a0}, A(2) = {a2}")]
    NoBracket { a0: f64, a2: f64 },
    #[error("|P'(phi)| = {0:e} vanishes on the sampled circle")]
    DerivativeVanishes(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
