//! Stationarity checks and the moment recursion for
//! `X_t = beta X_{t-k} eps_{t-k} + eps_t`.
//!
//! Under `beta^4 mu_4 < 1` (and finite `mu_8`) the products `X_t eps_t`
//! have moments
//!
//! ```text
//! E(X^n eps^n) = 1/(1 - beta^n mu_n) * sum_{i=1..n} C(n,i) beta^(n-i) mu_(n+i) E(X^(n-i) eps^(n-i))
//! E(X^n)       = sum_{i=0..n} C(n,i) beta^(n-i) mu_i E(X^(n-i) eps^(n-i))
//! ```
//!
//! for `n <= 4`, starting from `E(X^0 eps^0) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{InnovationSpec, MomentVector};

/// Recursion denominators closer than this to zero are rejected.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Coefficient and lag of the bilinear recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub beta: f64,
    pub lag: usize,
}

impl ModelSpec {
    pub fn new(beta: f64, lag: usize) -> Result<Self> {
        if lag == 0 {
            return Err(Error::Domain("lag must be at least 1".into()));
        }
        if !beta.is_finite() {
            return Err(Error::Domain(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { beta, lag })
    }

    /// First-order model, the only one with closed-form analytics.
    pub fn first_order(beta: f64) -> Result<Self> {
        Self::new(beta, 1)
    }

    fn require_first_order(&self) -> Result<()> {
        if self.lag != 1 {
            return Err(Error::Domain(format!(
                "closed-form moments need lag 1, got lag {}",
                self.lag
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// `beta^2 mu_2 < 1`
    pub x_weakly_stationary: bool,
    /// `beta^4 mu_4 < 1`
    pub x2_weakly_stationary: bool,
    /// `ln|beta| + E(ln|eps|)`; `-inf` when `beta = 0`.
    pub lyapunov_gamma: Option<f64>,
    /// `1 - beta^4 mu_4`
    pub margin: f64,
}

pub fn check_stationarity(
    model: &ModelSpec,
    mu: &MomentVector,
    spec: &InnovationSpec,
) -> StationarityReport {
    let b = model.beta;
    let lyapunov_gamma = spec.mean_log_abs().map(|m| b.abs().ln() + m);
    StationarityReport {
        x_weakly_stationary: b * b * mu.get(2) < 1.0,
        x2_weakly_stationary: b.powi(4) * mu.get(4) < 1.0,
        lyapunov_gamma,
        margin: 1.0 - b.powi(4) * mu.get(4),
    }
}

/// Largest `|beta|` with `beta^4 mu_4 < 1` (the bound itself is excluded).
pub fn beta_frontier(mu: &MomentVector) -> f64 {
    mu.get(4).powf(-0.25)
}

/// Checks `beta^4 mu_4 < 1` for a concrete law. Scale families report the
/// bound in the reduced coordinate `r = alpha * beta`.
pub fn check_model(spec: &InnovationSpec, model: &ModelSpec) -> Result<()> {
    let mu = spec.raw_moments();
    if model.beta.powi(4) * mu.get(4) < 1.0 {
        return Ok(());
    }
    let bound = beta_frontier(&mu);
    let msg = match (spec.scale(), spec.frontier_label()) {
        (Some(alpha), Some(label)) => {
            format!("r \u{2265} {label} (r = {}, bound {bound:.6})", alpha * model.beta)
        }
        _ => format!("|beta| \u{2265} {bound:.6} for {spec} (beta = {})", model.beta),
    };
    Err(Error::NotStationary(msg))
}

/// [`x_moments`] for a concrete law, with [`check_model`] messages.
pub fn moment_table(spec: &InnovationSpec, model: &ModelSpec) -> Result<MomentTable> {
    check_model(spec, model)?;
    x_moments(model, &spec.raw_moments())
}

/// Moments of `X_t` and `X_t eps_t` up to order four.
///
/// Arrays are indexed by order; entry `0` holds the trivial moment `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    /// `exe[n] = E(X^n eps^n)`
    pub exe: [f64; 5],
    /// `ex[n] = E(X^n)`
    pub ex: [f64; 5],
    pub variance: f64,
    pub excess_kurtosis: f64,
}

impl MomentTable {
    /// Fourth central moment `E[(X - EX)^4]`.
    pub fn central4(&self) -> f64 {
        let [_, m1, m2, m3, m4] = self.ex;
        m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4)
    }
}

const BINOMIAL: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

fn require_stationary(model: &ModelSpec, mu: &MomentVector) -> Result<()> {
    let load = model.beta.powi(4) * mu.get(4);
    if load >= 1.0 {
        return Err(Error::NotStationary(format!(
            "beta^4 mu_4 = {load} >= 1 (beta = {})",
            model.beta
        )));
    }
    Ok(())
}

/// `E(X^n eps^n)` for `n = 0..=4`.
pub fn xeps_moments(model: &ModelSpec, mu: &MomentVector) -> Result<[f64; 5]> {
    model.require_first_order()?;
    require_stationary(model, mu)?;
    let b = model.beta;
    let mut exe = [1.0; 5];
    for n in 1..=4 {
        let load = b.powi(n as i32) * mu.get(n);
        if load.abs() >= 1.0 - POLE_TOLERANCE {
            return Err(Error::Pole { order: n, value: load.abs() });
        }
        let sum: f64 = (1..=n)
            .map(|i| BINOMIAL[n][i] * b.powi((n - i) as i32) * mu.get(n + i) * exe[n - i])
            .sum();
        exe[n] = sum / (1.0 - load);
    }
    Ok(exe)
}

/// Full moment table of `X_t`.
pub fn x_moments(model: &ModelSpec, mu: &MomentVector) -> Result<MomentTable> {
    let exe = xeps_moments(model, mu)?;
    let b = model.beta;
    let mut ex = [1.0; 5];
    for n in 1..=4 {
        ex[n] = (0..=n)
            .map(|i| BINOMIAL[n][i] * b.powi((n - i) as i32) * mu.get(i) * exe[n - i])
            .sum();
    }
    let variance = ex[2] - ex[1] * ex[1];
    let mut table = MomentTable { exe, ex, variance, excess_kurtosis: f64::NAN };
    table.excess_kurtosis = table.central4() / (variance * variance) - 3.0;
    Ok(table)
}
