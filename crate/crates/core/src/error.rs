use thiserror::Error;

/// Errors raised by the analytics, region finder and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The fourth-moment stationarity condition fails.
    #[error("stationarity violated: {0}")]
    NotStationary(String),

    /// A recursion denominator `1 - beta^n mu_n` came too close to zero.
    #[error("pole: |beta^{order} mu_{order}| = {value} is within 1e-12 of 1")]
    Pole { order: usize, value: f64 },

    /// A rational formula's denominator vanished.
    #[error("pole: denominator {value:e} at r = {r}")]
    DenominatorPole { r: f64, value: f64 },

    #[error("degenerate variance {0:e}")]
    DegenerateVariance(f64),

    /// Simulated path left the representable range.
    #[error("overflow at step {step}: |X_t| exceeded 1e300")]
    Overflow { step: usize },

    /// Both ends of a sign-change bracket are numerically zero.
    #[error("unresolved bracket [{lo}, {hi}]: |delta| below 1e-14 at both ends, refine the grid")]
    UnresolvedBracket { lo: f64, hi: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for domain and stationarity failures, false for numeric ones.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::NotStationary(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
