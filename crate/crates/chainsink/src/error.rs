//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site index {site} out of range (1..={n_systems})")]
    SiteOutOfRange { site: usize, n_systems: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("positivity violation: eigenvalue {eigenvalue:.3e} below -{tolerance:.1e}")]
    PositivityViolation { eigenvalue: f64, tolerance: f64 },

    #[error("integrator failure at t = {t:.6}: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("trajectory not converged (terminated at t = {t:.6}, residual {residual:.3e})")]
    NotConverged { t: f64, residual: f64 },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error(
        "no sign change of eta_Q - eta_C over [{lo}, {hi}] \
         (f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e}); try a wider bracket"
    )]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("{scenario} scenario: {source}")]
    Scenario {
        scenario: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("metadata error: {0}")]
    Meta(String),
}

impl Error {
    /// Tag an error with the scenario whose propagation produced it.
    pub fn in_scenario(self, scenario: &'static str) -> Self {
        Error::Scenario {
            scenario,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
