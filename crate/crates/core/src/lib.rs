//! Lag-1 autocorrelation and kurtosis analytics for the simple bilinear
//! diagonal model `X_t = beta X_{t-k} eps_{t-k} + eps_t`.
//!
//! * [`innovations`]: innovation laws, raw moments and samplers.
//! * [`moments`]: stationarity checks and the moment recursion.
//! * [`lag1`]: closed-form `rho_X(1)`, `rho_{X^2}(1)` and excess kurtosis
//!   for any innovation law with finite eighth moment.
//! * [`reference`]: closed-form rational functions in `r = alpha * beta` for
//!   four non-negative laws.
//! * [`region`]: certified intervals of `r` where `rho_X(1) > rho_{X^2}(1)`.
//! * [`monte_carlo`]: path simulation and the replication experiment for
//!   symmetric innovations.

pub mod error;
pub mod innovations;
pub mod lag1;
pub mod monte_carlo;
pub mod moments;
pub mod reference;
pub mod region;
pub mod rng;

pub use error::{Error, Result};
pub use innovations::{Family, InnovationSpec, MomentVector};
pub use lag1::{lag1_report, CrossMoments, Lag1Report};
pub use moments::{check_stationarity, x_moments, xeps_moments, ModelSpec, MomentTable, StationarityReport};
pub use region::{find_regions, DeltaSource, TaylorRegion};
