use alloc::string::String;

/// Failures reported by the numerical core.
///
/// Each variant carries the kebab-case code used in machine-readable
/// reports (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("adaptive quadrature exceeded its refinement budget (error estimate {estimate:e})")]
    QuadratureBudgetExceeded { estimate: f64 },
    #[error("atomic densities cannot be evaluated pointwise; use the atoms")]
    NotPointwiseEvaluable,
    #[error("quadrature construction failed: {0}")]
    QuadratureConstructionFailed(String),
    #[error("moment p={p} is undefined because the exact constant diverges")]
    MomentUndefined { p: i32 },
    #[error("mode step unstable: dt*omega = {omega_dt:.4} > 2.5 (node {node})")]
    ModeStepUnstable { node: usize, omega_dt: f64 },
    #[error("commutator input is not smooth at the sampling resolution")]
    CommutatorInputNotSmooth,
    #[error("oscillatory quadrature did not reach tolerance within its panel budget")]
    OscillatoryQuadratureBudget,
    #[error("spectral-averaging decay requires S5 (a locally absolutely continuous density)")]
    S5Required,
    #[error("self-energy denominator changes sign inside the spectral support")]
    PrincipalValueNotSupported,
    #[error("root bracket failed: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    RootBracketFailed { g_lo: f64, g_hi: f64 },
    #[error("initial profile support violates the causal padding: {0}")]
    PaddingViolated(String),
    #[error("non-finite field value at t = {t}, r = {r}")]
    BlowUpDetected { t: f64, r: f64 },
    #[error("errors are not decreasing under refinement")]
    NotInAsymptoticRegime,
    #[error("memory norm is below numerical noise")]
    MemoryBelowNoise,
    #[error("requested snapshot at t = {0} is unavailable")]
    SnapshotUnavailable(f64),
    #[error("fit needs at least {needed} positive samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("zero frequency")]
    ZeroFrequency,
}

impl Error {
    /// Stable identifier for reports and exit-code mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::QuadratureBudgetExceeded { .. } => "quadrature-budget-exceeded",
            Error::NotPointwiseEvaluable => "not-pointwise-evaluable",
            Error::QuadratureConstructionFailed(_) => "quadrature-construction-failed",
            Error::MomentUndefined { .. } => "moment-undefined",
            Error::ModeStepUnstable { .. } => "mode-step-unstable",
            Error::CommutatorInputNotSmooth => "commutator-input-not-smooth",
            Error::OscillatoryQuadratureBudget => "oscillatory-quadrature-budget",
            Error::S5Required => "S5-required",
            Error::PrincipalValueNotSupported => "principal-value-not-supported",
            Error::RootBracketFailed { .. } => "root-bracket-failed",
            Error::PaddingViolated(_) => "padding-violated",
            Error::BlowUpDetected { .. } => "blow-up-detected",
            Error::NotInAsymptoticRegime => "not-in-asymptotic-regime",
            Error::MemoryBelowNoise => "memory-below-noise",
            Error::SnapshotUnavailable(_) => "snapshot-unavailable",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::ZeroFrequency => "zero-frequency",
        }
    }

    /// Whether the failure is a validation problem (bad input) rather than
    /// a numerical outcome.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::NotPointwiseEvaluable
                | Error::PaddingViolated(_)
                | Error::S5Required
                | Error::SnapshotUnavailable(_)
                | Error::ZeroFrequency
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
