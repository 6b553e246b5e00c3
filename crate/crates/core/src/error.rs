use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Non-finite values, empty inputs, or arguments outside a routine's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative method stopped without meeting its tolerance.
    #[error("numeric failure: {message} (worst residual {residual:e})")]
    NumericFailure { message: String, residual: f64 },

    /// The operation is not defined for this parameter regime.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The coupling is too weak for the pseudo-Hermitian detuning to be real.
    #[error("coupling G_a = {g_a} is below the minimum {g_min} required for a real detuning")]
    InfeasibleCoupling { g_a: f64, g_min: f64 },

    /// `(1 + eta)(1 + lambda^2 eta) > 0` does not hold.
    #[error("no pseudo-Hermitian parameter set for eta = {eta}, lambda = {lambda}: (1+eta)(1+lambda^2 eta) must be positive")]
    InfeasibleLambda { eta: f64, lambda: f64 },

    /// A third-order exceptional point needs `-2 < eta < -1/2`.
    #[error("eta = {0} admits no third-order exceptional point: (eta+2)(2eta+1) < 0 requires -2 < eta < -1/2")]
    Ep3InfeasibleEta(f64),

    /// `lambda = G_c / G_a` with `G_a = 0`.
    #[error("coupling ratio lambda is undefined because G_a = 0")]
    UndefinedLambda,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
