use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input values (non-half-integer angular momenta, negative
    /// widths, angles out of range, unparseable config keys, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration or state that leaves the requested quantity undefined
    /// (e.g. no Stokes field at all, so the dark frame does not exist).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Configuration file or override could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A documented operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The adaptive integrator could not continue past `t_last`.
    #[error("integration failed: step size underflow at t = {t_last}")]
    IntegrationFailure { t_last: f64 },

    /// Inverse design did not reach the residual threshold; the best
    /// candidate found is reported alongside.
    #[error("design did not converge: best residual {residual:.3e} (eta={eta:.6}, nu={nu:.6}, phi={phi:.6})")]
    NoConvergence {
        eta: f64,
        nu: f64,
        phi: f64,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
