//! Closed-form lag-1 autocorrelations of `X` and `X^2` for the first-order
//! model, valid for any innovation law with finite `mu_8`.
//!
//! `E(X_t X_{t-1})` and `E(X_t^2 X_{t-1}^2)` are reduced to the moments
//! `E(X^n eps^n)` through six auxiliary expectations:
//!
//! ```text
//! E1 = E(X_t^2 X_{t-1}^2 eps_t^2 eps_{t-1}^2) = b^2 mu2 exe4 + 2b mu3 exe3 + mu4 exe2
//! E2 = E(X_t^2 X_{t-1} eps_t^3 eps_{t-1})     = b^2 mu3 exe3 + 2b mu4 exe2 + mu5 exe1
//! E3 = E(X_t X_{t-1}^2 eps_t eps_{t-1}^2)     = b mu1 exe3 + mu2 exe2
//! E4 = E(X_t X_{t-1} eps_t^2 eps_{t-1})       = b mu2 exe2 + mu3 exe1
//! E5 = E(X_t^2 eps_t^4)                       = b^2 mu4 exe2 + 2b mu5 exe1 + mu6
//! E6 = E(X_t eps_t^3)                         = b mu3 exe1 + mu4
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{InnovationSpec, MomentVector};
use crate::moments::{check_model, x_moments, ModelSpec, MomentTable};

/// Variances at or below this are treated as degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossMoments {
    /// `E(X_t X_{t-1})`
    pub m11: f64,
    /// `E(X_t^2 X_{t-1}^2)`
    pub m22: f64,
    /// Auxiliary expectations `E1..E6`, in order.
    pub aux: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lag1Report {
    /// `rho_X(1)`
    pub rho1: f64,
    /// `rho_{X^2}(1)`
    pub rho1_sq: f64,
    /// `rho1 - rho1_sq`
    pub delta: f64,
    pub excess_kurtosis: f64,
    /// `alpha * beta` for scale families.
    pub r: Option<f64>,
}

impl Lag1Report {
    /// Lag-1 Taylor property: `rho_X(1) > rho_{X^2}(1)`.
    pub fn taylor_holds(&self) -> bool {
        self.delta > 0.0
    }
}

/// `E(X_t X_{t-1}) = b^3 mu1 exe2 + 2 b^2 mu2 exe1 + mu1 E(X) + b mu3`.
pub fn cross_moment_lag1(model: &ModelSpec, mu: &MomentVector, table: &MomentTable) -> f64 {
    let b = model.beta;
    let exe = &table.exe;
    b.powi(3) * mu.get(1) * exe[2]
        + 2.0 * b * b * mu.get(2) * exe[1]
        + mu.get(1) * table.ex[1]
        + b * mu.get(3)
}

/// `E(X_t^2 X_{t-1}^2)` together with `E1..E6`.
pub fn cross_moment_sq_lag1(
    model: &ModelSpec,
    mu: &MomentVector,
    table: &MomentTable,
) -> (f64, [f64; 6]) {
    let b = model.beta;
    let m = |i: usize| mu.get(i);
    let exe = &table.exe;
    let e1 = b * b * m(2) * exe[4] + 2.0 * b * m(3) * exe[3] + m(4) * exe[2];
    let e2 = b * b * m(3) * exe[3] + 2.0 * b * m(4) * exe[2] + m(5) * exe[1];
    let e3 = b * m(1) * exe[3] + m(2) * exe[2];
    let e4 = b * m(2) * exe[2] + m(3) * exe[1];
    let e5 = b * b * m(4) * exe[2] + 2.0 * b * m(5) * exe[1] + m(6);
    let e6 = b * m(3) * exe[1] + m(4);
    let m22 = b.powi(4) * e1
        + 2.0 * b.powi(3) * e2
        + 2.0 * b.powi(3) * m(1) * e3
        + 4.0 * b * b * m(1) * e4
        + b * b * e5
        + 2.0 * b * m(1) * e6
        + b * b * m(2) * exe[2]
        + 2.0 * b * m(1) * m(2) * exe[1]
        + m(2) * m(2);
    (m22, [e1, e2, e3, e4, e5, e6])
}

pub fn cross_moments(model: &ModelSpec, mu: &MomentVector, table: &MomentTable) -> CrossMoments {
    let m11 = cross_moment_lag1(model, mu, table);
    let (m22, aux) = cross_moment_sq_lag1(model, mu, table);
    CrossMoments { m11, m22, aux }
}

/// Lag-1 report from raw moments. `r` is left empty.
pub fn lag1_from_moments(model: &ModelSpec, mu: &MomentVector) -> Result<Lag1Report> {
    let table = x_moments(model, mu)?;
    let cross = cross_moments(model, mu, &table);
    let var_sq = table.ex[4] - table.ex[2] * table.ex[2];
    if table.variance <= VARIANCE_FLOOR {
        return Err(Error::DegenerateVariance(table.variance));
    }
    if var_sq <= VARIANCE_FLOOR {
        return Err(Error::DegenerateVariance(var_sq));
    }
    let rho1 = (cross.m11 - table.ex[1] * table.ex[1]) / table.variance;
    let rho1_sq = (cross.m22 - table.ex[2] * table.ex[2]) / var_sq;
    for (name, rho) in [("rho_X(1)", rho1), ("rho_X2(1)", rho1_sq)] {
        if !(rho.abs() <= 1.0 + 1e-9) {
            return Err(Error::Numeric(format!("{name} = {rho} outside [-1, 1]")));
        }
    }
    Ok(Lag1Report {
        rho1,
        rho1_sq,
        delta: rho1 - rho1_sq,
        excess_kurtosis: table.excess_kurtosis,
        r: None,
    })
}

pub fn lag1_report(spec: &InnovationSpec, model: &ModelSpec) -> Result<Lag1Report> {
    check_model(spec, model)?;
    let mut report = lag1_from_moments(model, &spec.raw_moments())?;
    report.r = spec.scale().map(|alpha| alpha * model.beta);
    Ok(report)
}
