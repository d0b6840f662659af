//! Path simulation of `X_t = beta X_{t-k} eps_{t-k} + eps_t`, sample
//! autocorrelations, and the replication experiment estimating the
//! probability that a finite sample shows `rho_|X|(1) > rho_{X^2}(1)`.
//!
//! Paths start from `X_t = eps_t` for the first `k` steps; `burn_in`
//! further observations are discarded before the `n_obs` that are kept.
//!
//! Replication `i` of a cell draws from ChaCha stream `i` of a seed derived
//! from `(seed, family name, beta)`, so reports do not depend on thread
//! scheduling or on which other cells run alongside.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::innovations::InnovationSpec;
use crate::moments::ModelSpec;
use crate::region::fmt_num;
use crate::rng;

pub const DEFAULT_N_OBS: usize = 500;
pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_N_REPS: usize = 60;
pub const MIN_SERIES_LEN: usize = 30;
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Transformed series with a smaller sample variance are degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-14;
const WALD_Z: f64 = 1.96;

/// Coefficients of the replication study.
pub const TABLE1_BETAS: [f64; 12] =
    [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.69, 0.74, 0.75, 0.863];
/// Unit-variance symmetric laws of the replication study, by kurtosis.
pub const TABLE1_FAMILIES: [&str; 4] = ["unif-sym", "normal", "t30", "t9"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub innovation: InnovationSpec,
    pub n_obs: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        model: ModelSpec,
        innovation: InnovationSpec,
        n_obs: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_obs < MIN_SERIES_LEN {
            return Err(Error::Domain(format!(
                "n_obs = {n_obs} below the minimum of {MIN_SERIES_LEN}"
            )));
        }
        Ok(Self { model, innovation, n_obs, burn_in, seed })
    }

    /// `beta^4 mu_4 < 1`
    pub fn is_stationary(&self) -> bool {
        self.model.beta.powi(4) * self.innovation.raw_moments().get(4) < 1.0
    }
}

/// Kept observations and the innovations that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    /// Whether the parameters satisfy `beta^4 mu_4 < 1`.
    pub stationary: bool,
}

pub fn simulate_path(config: &SimConfig) -> Result<SimPath> {
    simulate_with_rng(config, &mut rng::from_seed(config.seed))
}

pub fn simulate_with_rng<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<SimPath> {
    let total = config.burn_in + config.n_obs;
    let k = config.model.lag;
    let beta = config.model.beta;
    let mut x = Vec::with_capacity(total);
    let mut eps = Vec::with_capacity(total);
    for t in 0..total {
        let e = config.innovation.sample(rng);
        let value = if t < k { e } else { beta * x[t - k] * eps[t - k] + e };
        if !(value.abs() <= OVERFLOW_LIMIT) {
            return Err(Error::Overflow { step: t });
        }
        x.push(value);
        eps.push(e);
    }
    x.drain(..config.burn_in);
    eps.drain(..config.burn_in);
    Ok(SimPath { x, eps, stationary: config.is_stationary() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Abs,
    Square,
    Identity,
}

impl Transform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Abs => v.abs(),
            Transform::Square => v * v,
            Transform::Identity => v,
        }
    }
}

/// Sample autocorrelation at `lag` of the transformed series, centred on the
/// full-sample mean and normalized by the full-sample sum of squares.
pub fn sample_acf(series: &[f64], transform: Transform, lag: usize) -> Result<f64> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::Domain(format!("series length {n} below {MIN_SERIES_LEN}")));
    }
    if lag == 0 || lag >= n {
        return Err(Error::Domain(format!("lag {lag} out of range for length {n}")));
    }
    let y: Vec<f64> = series.iter().map(|&v| transform.apply(v)).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = ss / n as f64;
    if !(variance >= DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance(variance));
    }
    let cross: f64 = y.windows(lag + 1).map(|w| (w[lag] - mean) * (w[0] - mean)).sum();
    Ok(cross / ss)
}

pub fn sample_acf1(series: &[f64], transform: Transform) -> Result<f64> {
    sample_acf(series, transform, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// `p +- 1.96 sqrt(p(1-p)/n)` clipped to `[0, 1]`.
    Wald,
    /// Exact binomial interval from beta quantiles.
    ClopperPearson,
}

/// What counts as a replication showing the property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessRule {
    /// `rho_|X|(1) > rho_{X^2}(1)` on the sample.
    Lag1,
    /// The lag-`l` inequality holds for a strict majority of `l = 1..=max_lag`.
    Majority { max_lag: usize },
}

impl SuccessRule {
    fn holds(self, x: &[f64]) -> Result<bool> {
        let gap = |lag| Ok(sample_acf(x, Transform::Abs, lag)? > sample_acf(x, Transform::Square, lag)?);
        match self {
            SuccessRule::Lag1 => gap(1),
            SuccessRule::Majority { max_lag } => {
                let mut wins = 0;
                for lag in 1..=max_lag {
                    if gap(lag)? {
                        wins += 1;
                    }
                }
                Ok(2 * wins > max_lag)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOptions {
    pub n_obs: usize,
    pub n_reps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub ci: CiMethod,
    pub rule: SuccessRule,
}

impl Default for ReplicationOptions {
    fn default() -> Self {
        Self {
            n_obs: DEFAULT_N_OBS,
            n_reps: DEFAULT_N_REPS,
            burn_in: DEFAULT_BURN_IN,
            seed: 42,
            ci: CiMethod::Wald,
            rule: SuccessRule::Lag1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub beta: f64,
    pub family: String,
    pub n_reps: usize,
    pub successes: usize,
    /// Replications that overflowed or degenerated; excluded from `p_hat`.
    pub failed: usize,
    pub p_hat: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub ci_method: CiMethod,
    /// `beta^4 mu_4 >= 1`: nothing was simulated.
    pub not_applicable: bool,
}

impl ReplicationReport {
    /// Interval as `[lo,hi]` with three decimals, or `NA`.
    pub fn ci_label(&self) -> String {
        match (self.not_applicable, self.ci_lo, self.ci_hi) {
            (true, ..) => "NA".into(),
            (false, Some(lo), Some(hi)) => format!("[{},{}]", trim3(lo), trim3(hi)),
            _ => "failed".into(),
        }
    }
}

fn trim3(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

/// Binomial confidence interval at 95%.
pub fn confidence_interval(successes: usize, n: usize, method: CiMethod) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    match method {
        CiMethod::Wald => {
            let half = WALD_Z * (p * (1.0 - p) / nf).sqrt();
            ((p - half).max(0.0), (p + half).min(1.0))
        }
        CiMethod::ClopperPearson => {
            let x = successes as f64;
            let lo = if successes == 0 {
                0.0
            } else {
                Beta::new(x, nf - x + 1.0).expect("positive shapes").inverse_cdf(0.025)
            };
            let hi = if successes == n {
                1.0
            } else {
                Beta::new(x + 1.0, nf - x).expect("positive shapes").inverse_cdf(0.975)
            };
            (lo.min(p), hi.max(p))
        }
    }
}

/// Seed of one `(family, beta)` cell.
pub fn cell_seed(seed: u64, innovation: &InnovationSpec, beta: f64) -> u64 {
    rng::mix(rng::mix(seed, rng::key_of(&innovation.to_string())), beta.to_bits())
}

pub fn replication_experiment(
    beta: f64,
    innovation: &InnovationSpec,
    options: &ReplicationOptions,
) -> Result<ReplicationReport> {
    let model = ModelSpec::first_order(beta)?;
    let config = SimConfig::new(model, *innovation, options.n_obs, options.burn_in, options.seed)?;
    if options.n_reps == 0 {
        return Err(Error::Domain("n_reps must be positive".into()));
    }
    let mut report = ReplicationReport {
        beta,
        family: innovation.to_string(),
        n_reps: options.n_reps,
        successes: 0,
        failed: 0,
        p_hat: None,
        ci_lo: None,
        ci_hi: None,
        ci_method: options.ci,
        not_applicable: !config.is_stationary(),
    };
    if report.not_applicable {
        return Ok(report);
    }
    let base = cell_seed(options.seed, innovation, beta);
    let outcomes: Vec<Option<bool>> = (0..options.n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(base, rep);
            let path = simulate_with_rng(&config, &mut rng).ok()?;
            options.rule.holds(&path.x).ok()
        })
        .collect();
    report.failed = outcomes.iter().filter(|o| o.is_none()).count();
    report.successes = outcomes.iter().filter(|o| **o == Some(true)).count();
    let valid = options.n_reps - report.failed;
    if valid > 0 {
        let (lo, hi) = confidence_interval(report.successes, valid, options.ci);
        report.p_hat = Some(report.successes as f64 / valid as f64);
        report.ci_lo = Some(lo);
        report.ci_hi = Some(hi);
    }
    Ok(report)
}

/// The full 12 x 4 grid, row-major over [`TABLE1_BETAS`].
pub fn run_table1(options: &ReplicationOptions) -> Result<Vec<ReplicationReport>> {
    let families = TABLE1_FAMILIES
        .iter()
        .map(|name| InnovationSpec::from_name(name))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, InnovationSpec)> = TABLE1_BETAS
        .iter()
        .flat_map(|&b| families.iter().map(move |f| (b, *f)))
        .collect();
    cells
        .par_iter()
        .map(|(beta, family)| replication_experiment(*beta, family, options))
        .collect()
}

pub fn render_table1(reports: &[ReplicationReport]) -> String {
    let mut families: Vec<&str> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for r in reports {
        if !families.contains(&r.family.as_str()) {
            families.push(&r.family);
        }
        if !betas.contains(&r.beta) {
            betas.push(r.beta);
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "beta");
    for f in &families {
        let _ = write!(out, " | {f:<15}");
    }
    out.push('\n');
    for beta in betas {
        let _ = write!(out, "{beta:<6}");
        for f in &families {
            let label = reports
                .iter()
                .find(|r| r.beta == beta && r.family == *f)
                .map(ReplicationReport::ci_label)
                .unwrap_or_default();
            let _ = write!(out, " | {label:<15}");
        }
        out.push('\n');
    }
    out
}

pub fn write_replication_csv<W: Write>(reports: &[ReplicationReport], mut out: W) -> io::Result<()> {
    writeln!(out, "beta,family,n_reps,p_hat,ci_lo,ci_hi,na_flag")?;
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| "NA".into());
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.beta,
            r.family,
            r.n_reps,
            opt(r.p_hat),
            opt(r.ci_lo),
            opt(r.ci_hi),
            u8::from(r.not_applicable)
        )?;
    }
    Ok(())
}

/// Sample `rho_{X^2}(1)` of a lag-2 model with symmetric innovations, which
/// vanishes in theory.
pub fn symmetric_k2_check(innovation: &InnovationSpec, beta: f64, n_obs: usize, seed: u64) -> Result<f64> {
    if !innovation.is_symmetric() {
        return Err(Error::Domain(format!("{innovation} is not symmetric")));
    }
    let config = SimConfig::new(ModelSpec::new(beta, 2)?, *innovation, n_obs, DEFAULT_BURN_IN, seed)?;
    let path = simulate_path(&config)?;
    sample_acf1(&path.x, Transform::Square)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str) -> InnovationSpec {
        InnovationSpec::from_name(name).unwrap()
    }

    fn config(name: &str, beta: f64, lag: usize, n_obs: usize, seed: u64) -> SimConfig {
        SimConfig::new(ModelSpec::new(beta, lag).unwrap(), spec(name), n_obs, DEFAULT_BURN_IN, seed).unwrap()
    }

    #[test]
    fn zero_beta_path_is_the_innovation_stream() {
        let path = simulate_path(&config("exp", 0.0, 1, 100, 5)).unwrap();
        assert_eq!(path.x, path.eps);
        let mut rng = rng::from_seed(5);
        let direct: Vec<f64> = (0..600).map(|_| spec("exp").sample(&mut rng)).collect();
        assert_eq!(path.x, direct[500..]);
    }

    #[test]
    fn recursion_holds_along_the_path() {
        for lag in [1, 3] {
            let path = simulate_path(&config("normal", 0.4, lag, 200, 9)).unwrap();
            for t in lag..path.x.len() {
                let expect = 0.4 * path.x[t - lag] * path.eps[t - lag] + path.eps[t];
                assert_eq!(path.x[t], expect);
            }
        }
    }

    #[test]
    fn deterministic_paths() {
        let c = config("t9", 0.6, 1, 1000, 77);
        assert_eq!(simulate_path(&c).unwrap(), simulate_path(&c).unwrap());
        let other = config("t9", 0.6, 1, 1000, 78);
        assert_ne!(simulate_path(&c).unwrap().x, simulate_path(&other).unwrap().x);
    }

    #[test]
    fn boundary_cell_does_not_overflow() {
        let path = simulate_path(&config("unif-sym", 0.863, 1, 500, 1)).unwrap();
        assert!(path.stationary);
        assert_eq!(path.x.len(), 500);
    }

    #[test]
    fn explosive_parameters_overflow() {
        let c = config("exp", 3.0, 1, 5_000, 1);
        assert!(!c.is_stationary());
        assert!(matches!(simulate_path(&c), Err(Error::Overflow { .. })));
    }

    #[test]
    fn config_validation() {
        let m = ModelSpec::first_order(0.1).unwrap();
        assert!(SimConfig::new(m, spec("exp"), 29, 0, 1).is_err());
        assert!(SimConfig::new(m, spec("exp"), 30, 0, 1).is_ok());
    }

    #[test]
    fn acf_of_constant_is_degenerate() {
        let err = sample_acf1(&[2.5; 100], Transform::Identity).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance(_)));
        assert!(sample_acf1(&[1.0; 10], Transform::Identity).unwrap_err().is_domain());
    }

    #[test]
    fn acf_of_iid_is_near_zero() {
        let n = 100_000;
        let path = simulate_path(&config("exp", 0.0, 1, n, 3)).unwrap();
        let rho = sample_acf1(&path.x, Transform::Identity).unwrap();
        assert!(rho.abs() < 4.0 / (n as f64).sqrt(), "{rho}");
    }

    #[test]
    fn acf_hand_computed() {
        let mut series: Vec<f64> = (0..30).map(|i| i as f64).collect();
        series[0] = -2.0;
        // independent direct sum
        let mean = series.iter().sum::<f64>() / 30.0;
        let num: f64 = (1..30).map(|t| (series[t] - mean) * (series[t - 1] - mean)).sum();
        let den: f64 = series.iter().map(|v| (v - mean).powi(2)).sum();
        assert!((sample_acf1(&series, Transform::Identity).unwrap() - num / den).abs() < 1e-15);
    }

    #[test]
    fn abs_equals_identity_for_positive_laws() {
        for name in ["exp", "pareto12", "uniform0a"] {
            let path = simulate_path(&config(name, 0.3, 1, 2000, 4)).unwrap();
            assert_eq!(
                sample_acf1(&path.x, Transform::Abs).unwrap(),
                sample_acf1(&path.x, Transform::Identity).unwrap()
            );
        }
    }

    #[test]
    fn wald_interval_shapes() {
        let (lo, hi) = confidence_interval(30, 60, CiMethod::Wald);
        assert_eq!((trim3(lo), trim3(hi)), ("0.373".into(), "0.627".into()));
        let (lo, hi) = confidence_interval(59, 60, CiMethod::Wald);
        assert_eq!((trim3(lo), hi), ("0.951".into(), 1.0));
        assert_eq!(confidence_interval(0, 60, CiMethod::Wald), (0.0, 0.0));
    }

    #[test]
    fn clopper_pearson_contains_wald_centre() {
        for s in [0, 1, 17, 30, 59, 60] {
            let (lo, hi) = confidence_interval(s, 60, CiMethod::ClopperPearson);
            let p = s as f64 / 60.0;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
        let (lo, hi) = confidence_interval(0, 60, CiMethod::ClopperPearson);
        assert_eq!(lo, 0.0);
        // 1 - 0.025^(1/60)
        assert!((hi - (1.0 - 0.025f64.powf(1.0 / 60.0))).abs() < 1e-6);
    }

    #[test]
    fn not_applicable_cell() {
        let r = replication_experiment(0.75, &spec("t30"), &ReplicationOptions::default()).unwrap();
        assert!(r.not_applicable);
        assert_eq!(r.ci_label(), "NA");
        assert_eq!(r.p_hat, None);
    }

    #[test]
    fn report_invariants_and_determinism() {
        let opts = ReplicationOptions { n_reps: 40, ..Default::default() };
        let a = replication_experiment(0.5, &spec("t9"), &opts).unwrap();
        let b = replication_experiment(0.5, &spec("t9"), &opts).unwrap();
        assert_eq!(a, b);
        let (lo, p, hi) = (a.ci_lo.unwrap(), a.p_hat.unwrap(), a.ci_hi.unwrap());
        assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        assert_eq!(a.failed, 0);
    }

    #[test]
    fn small_beta_uniform_never_shows_property() {
        let r = replication_experiment(0.2, &spec("unif-sym"), &ReplicationOptions::default()).unwrap();
        assert_eq!(r.p_hat, Some(0.0));
        assert_eq!((r.ci_lo, r.ci_hi), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn iid_normal_is_a_coin_flip() {
        let opts = ReplicationOptions { n_reps: 1000, ..Default::default() };
        let r = replication_experiment(0.0, &spec("normal"), &opts).unwrap();
        let p = r.p_hat.unwrap();
        assert!((p - 0.5).abs() < 1.96 * (0.25f64 / 1000.0).sqrt() * 2.0, "{p}");
    }

    #[test]
    fn majority_rule_runs() {
        let opts = ReplicationOptions {
            n_reps: 20,
            rule: SuccessRule::Majority { max_lag: 5 },
            ..Default::default()
        };
        let r = replication_experiment(0.6, &spec("t9"), &opts).unwrap();
        assert_eq!(r.n_reps, 20);
        assert!(r.p_hat.is_some());
    }

    #[test]
    fn k2_check_requires_symmetry() {
        assert!(symmetric_k2_check(&spec("exp"), 0.3, 1000, 1).unwrap_err().is_domain());
        let rho = symmetric_k2_check(&spec("normal"), 0.0, 100_000, 1).unwrap();
        assert!(rho.abs() < 5.0 * 4.0 / (100_000f64).sqrt());
    }

    #[test]
    fn table_rendering_and_csv() {
        let opts = ReplicationOptions { n_reps: 10, n_obs: 100, burn_in: 50, ..Default::default() };
        let reports = vec![
            replication_experiment(0.2, &spec("normal"), &opts).unwrap(),
            replication_experiment(0.75, &spec("t30"), &opts).unwrap(),
        ];
        let text = render_table1(&reports);
        assert!(text.starts_with("beta   | normal"));
        assert!(text.contains("NA"));
        let mut buf = Vec::new();
        write_replication_csv(&reports, &mut buf).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "beta,family,n_reps,p_hat,ci_lo,ci_hi,na_flag");
        assert_eq!(lines[2], "0.75,t30,10,NA,NA,NA,1");
    }
}
