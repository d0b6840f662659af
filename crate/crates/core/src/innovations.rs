//! Innovation distributions: exact raw moments, log-moment diagnostics and
//! seedable samplers.
//!
//! Sampling methods are fixed per family so that a seed reproduces the
//! same stream everywhere:
//!
//! | family              | method                                               |
//! |---------------------|------------------------------------------------------|
//! | `UniformPositive`   | inversion, `alpha * u`                               |
//! | `Exponential`       | inversion, `-alpha * ln(1 - u)`                      |
//! | `Pareto`            | inversion, `alpha * (1 - u)^(-1/nu)`                 |
//! | `UniformSymmetric`  | inversion, `sqrt(3) * (2u - 1)`                      |
//! | `StandardNormal`    | Ziggurat (`rand_distr::StandardNormal`)              |
//! | `ScaledStudentT`    | `sqrt((nu-2)/nu) * Z / sqrt(V / nu)`, `V ~ chi2(nu)` |
//!
//! `u` is a uniform `f64` in `[0, 1)` drawn from the stream generator.

use std::fmt;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Highest raw moment order the analytics consume.
pub const MAX_ORDER: usize = 8;

/// Distribution family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Uniform on `]0, alpha[`.
    UniformPositive { alpha: f64 },
    /// Exponential with mean `alpha`.
    Exponential { alpha: f64 },
    /// Density `nu alpha^nu / x^(nu+1)` on `]alpha, inf[`.
    Pareto { nu: f64, alpha: f64 },
    /// Uniform on `]-sqrt(3), sqrt(3)[`, unit variance.
    UniformSymmetric,
    StandardNormal,
    /// `sqrt((nu-2)/nu) Y` with `Y` Student-t with `nu` degrees of freedom, unit variance.
    ScaledStudentT { nu: f64 },
}

/// A validated innovation law. Construction checks every parameter so that
/// all moments up to order eight are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InnovationSpec {
    family: Family,
}

impl InnovationSpec {
    pub fn new(family: Family) -> Result<Self> {
        let positive = |what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} must be a positive finite number, got {v}")))
            }
        };
        let heavy_tail = |law: &str, nu: f64| {
            positive("nu", nu)?;
            if nu <= MAX_ORDER as f64 {
                // first order whose moment diverges
                let order = (nu.floor() as usize).clamp(1, MAX_ORDER);
                let order = if (order as f64) < nu { order + 1 } else { order };
                return Err(Error::Domain(format!(
                    "{law} shape nu = {nu} leaves the moment of order {order} infinite (nu > 8 required)"
                )));
            }
            Ok(())
        };
        match family {
            Family::UniformPositive { alpha } | Family::Exponential { alpha } => {
                positive("alpha", alpha)?
            }
            Family::Pareto { nu, alpha } => {
                positive("alpha", alpha)?;
                heavy_tail("Pareto", nu)?;
            }
            Family::ScaledStudentT { nu } => heavy_tail("Student-t", nu)?,
            Family::UniformSymmetric | Family::StandardNormal => {}
        }
        Ok(Self { family })
    }

    pub fn uniform_positive(alpha: f64) -> Result<Self> {
        Self::new(Family::UniformPositive { alpha })
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        Self::new(Family::Exponential { alpha })
    }

    pub fn pareto(nu: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::Pareto { nu, alpha })
    }

    pub fn uniform_symmetric() -> Self {
        Self { family: Family::UniformSymmetric }
    }

    pub fn standard_normal() -> Self {
        Self { family: Family::StandardNormal }
    }

    pub fn scaled_student_t(nu: f64) -> Result<Self> {
        Self::new(Family::ScaledStudentT { nu })
    }

    /// Looks up a catalog name. Scale families get `alpha = 1`.
    ///
    /// Accepted: `uniform0a` (alias `uniform`), `exp`, `pareto<nu>` (e.g.
    /// `pareto12`), `unif-sym`, `normal`, `t<nu>` (e.g. `t30`).
    pub fn from_name(name: &str) -> Result<Self> {
        let parse_nu = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("unknown innovation family `{name}`")))
        };
        match name {
            "uniform0a" | "uniform" => Self::uniform_positive(1.0),
            "exp" => Self::exponential(1.0),
            "unif-sym" => Ok(Self::uniform_symmetric()),
            "normal" => Ok(Self::standard_normal()),
            _ => {
                if let Some(nu) = name.strip_prefix("pareto") {
                    Self::pareto(parse_nu(nu)?, 1.0)
                } else if let Some(nu) = name.strip_prefix('t') {
                    Self::scaled_student_t(parse_nu(nu)?)
                } else {
                    Err(Error::Domain(format!("unknown innovation family `{name}`")))
                }
            }
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Catalog name of the family (the scale parameter is not part of it).
    pub fn name(&self) -> String {
        match self.family {
            Family::UniformPositive { .. } => "uniform0a".into(),
            Family::Exponential { .. } => "exp".into(),
            Family::Pareto { nu, .. } => format!("pareto{nu}"),
            Family::UniformSymmetric => "unif-sym".into(),
            Family::StandardNormal => "normal".into(),
            Family::ScaledStudentT { nu } => format!("t{nu}"),
        }
    }

    /// Scale `alpha` of a scale family; `None` for the unit-variance laws.
    pub fn scale(&self) -> Option<f64> {
        match self.family {
            Family::UniformPositive { alpha }
            | Family::Exponential { alpha }
            | Family::Pareto { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Same family with a new scale.
    pub fn with_scale(&self, alpha: f64) -> Result<Self> {
        match self.family {
            Family::UniformPositive { .. } => Self::uniform_positive(alpha),
            Family::Exponential { .. } => Self::exponential(alpha),
            Family::Pareto { nu, .. } => Self::pareto(nu, alpha),
            _ => Err(Error::Domain(format!("{} has no scale parameter", self.name()))),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.family,
            Family::UniformSymmetric | Family::StandardNormal | Family::ScaledStudentT { .. }
        )
    }

    pub fn is_non_negative(&self) -> bool {
        self.scale().is_some()
    }

    /// Exact `mu_i = E(eps^i)` for `i = 0..=8`.
    pub fn raw_moments(&self) -> MomentVector {
        let mut mu = [0.0; MAX_ORDER + 1];
        for (i, m) in mu.iter_mut().enumerate() {
            *m = self.raw_moment(i);
        }
        MomentVector { mu }
    }

    fn raw_moment(&self, i: usize) -> f64 {
        if i == 0 {
            return 1.0;
        }
        let fi = i as f64;
        let even = i.is_multiple_of(2);
        match self.family {
            Family::UniformPositive { alpha } => alpha.powi(i as i32) / (fi + 1.0),
            Family::Exponential { alpha } => {
                (1..=i).map(|k| k as f64).product::<f64>() * alpha.powi(i as i32)
            }
            Family::Pareto { nu, alpha } => nu * alpha.powi(i as i32) / (nu - fi),
            Family::UniformSymmetric if even => SQRT_3.powi(i as i32) / (fi + 1.0),
            Family::StandardNormal if even => double_factorial(i - 1),
            Family::ScaledStudentT { nu } if even => {
                // ((nu-2)/nu)^m E(Y^2m), E(Y^2m) = nu^m prod_{j<=m} (2j-1)/(nu-2j)
                let m = i / 2;
                (1..=m)
                    .map(|j| (nu - 2.0) * (2 * j - 1) as f64 / (nu - 2.0 * j as f64))
                    .product()
            }
            _ => 0.0,
        }
    }

    /// Whether `E|ln|eps||` is finite. Holds for every catalog law.
    pub fn log_moment_exists(&self) -> bool {
        match self.family {
            Family::UniformPositive { .. }
            | Family::Exponential { .. }
            | Family::Pareto { .. }
            | Family::UniformSymmetric
            | Family::StandardNormal
            | Family::ScaledStudentT { .. } => true,
        }
    }

    /// Closed form of `E(ln|eps|)`.
    pub fn mean_log_abs(&self) -> Option<f64> {
        let ln2 = std::f64::consts::LN_2;
        let v = match self.family {
            Family::UniformPositive { alpha } => alpha.ln() - 1.0,
            Family::Exponential { alpha } => alpha.ln() - EULER_GAMMA,
            Family::Pareto { nu, alpha } => alpha.ln() + 1.0 / nu,
            Family::UniformSymmetric => SQRT_3.ln() - 1.0,
            Family::StandardNormal => -(EULER_GAMMA + ln2) / 2.0,
            Family::ScaledStudentT { nu } => {
                // E ln chi2(nu) = digamma(nu/2) + ln 2
                0.5 * ((nu - 2.0) / nu).ln() - (EULER_GAMMA + ln2) / 2.0
                    - 0.5 * (digamma(nu / 2.0) + ln2 - nu.ln())
            }
        };
        Some(v)
    }

    /// Symbolic form of the stationarity frontier in `r = alpha * beta`,
    /// i.e. `mu_4(alpha = 1)^(-1/4)`, for the scale families.
    pub fn frontier_label(&self) -> Option<String> {
        match self.family {
            Family::UniformPositive { .. } => Some("5^(1/4)".into()),
            Family::Exponential { .. } => Some("24^(\u{2212}1/4)".into()),
            Family::Pareto { nu, .. } if nu.fract() == 0.0 => {
                let (n, d) = reduce(nu as u64 - 4, nu as u64);
                Some(format!("({n}/{d})^(1/4)"))
            }
            Family::Pareto { nu, .. } => Some(format!("(({nu}-4)/{nu})^(1/4)")),
            _ => None,
        }
    }

    /// Draws one variate using the family's pinned method.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::UniformPositive { alpha } => alpha * rng.random::<f64>(),
            Family::Exponential { alpha } => -alpha * (1.0 - rng.random::<f64>()).ln(),
            Family::Pareto { nu, alpha } => alpha * (1.0 - rng.random::<f64>()).powf(-1.0 / nu),
            Family::UniformSymmetric => SQRT_3 * (2.0 * rng.random::<f64>() - 1.0),
            Family::StandardNormal => rng.sample(StandardNormal),
            Family::ScaledStudentT { nu } => {
                let z: f64 = rng.sample(StandardNormal);
                // nu > 8 was validated at construction
                let v = ChiSquared::new(nu).expect("valid degrees of freedom").sample(rng);
                ((nu - 2.0) / nu).sqrt() * z / (v / nu).sqrt()
            }
        }
    }
}

impl fmt::Display for InnovationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scale() {
            Some(alpha) if alpha != 1.0 => write!(f, "{}(alpha={alpha})", self.name()),
            _ => f.write_str(&self.name()),
        }
    }
}

impl<'de> Deserialize<'de> for InnovationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let family = Family::deserialize(d)?;
        InnovationSpec::new(family).map_err(serde::de::Error::custom)
    }
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

fn reduce(n: u64, d: u64) -> (u64, u64) {
    let (mut a, mut b) = (n, d);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    (n / a, d / a)
}

/// Raw moments `mu_0 = 1, mu_1, ..., mu_8` of an innovation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    mu: [f64; MAX_ORDER + 1],
}

impl MomentVector {
    /// Builds a vector from `mu_1..mu_8`, checking `mu_2 > 0`, non-negative
    /// even moments and `mu_2 >= mu_1^2`.
    pub fn from_raw(m: [f64; MAX_ORDER]) -> Result<Self> {
        let mut mu = [1.0; MAX_ORDER + 1];
        mu[1..].copy_from_slice(&m);
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("raw moments must be finite".into()));
        }
        if mu[2] <= 0.0 || mu[4] < 0.0 || mu[6] < 0.0 || mu[8] < 0.0 {
            return Err(Error::Domain("even raw moments must be non-negative, mu_2 > 0".into()));
        }
        if mu[2] < mu[1] * mu[1] {
            return Err(Error::Domain("mu_2 < mu_1^2".into()));
        }
        Ok(Self { mu })
    }

    /// `mu_i`, with `mu_0 = 1`.
    pub fn get(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn as_array(&self) -> &[f64; MAX_ORDER + 1] {
        &self.mu
    }

    pub fn mean(&self) -> f64 {
        self.mu[1]
    }

    pub fn variance(&self) -> f64 {
        self.mu[2] - self.mu[1] * self.mu[1]
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let [_, m1, m2, m3, m4, ..] = self.mu;
        let central4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
        central4 / self.variance().powi(2) - 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    /// Adaptive Simpson quadrature.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let diff = left + right - whole;
            // the first few levels are always split to avoid accidental agreement
            if depth == 0 || (depth < 44 && diff.abs() <= 15.0 * tol) {
                left + right + diff / 15.0
            } else {
                step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 48)
    }

    /// Moment of order `i` by quadrature of `x^i f(x)`, normalized by the
    /// quadrature of `f` itself so no normalizing constants are needed.
    fn quadrature_moment(spec: &InnovationSpec, i: i32) -> f64 {
        let ratio = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let num = simpson(&|x| x.powi(i) * g(x), a, b, 1e-12);
            let den = simpson(g, a, b, 1e-12);
            num / den
        };
        match spec.family() {
            Family::UniformPositive { alpha } => ratio(&|_| 1.0, 0.0, alpha),
            Family::Exponential { alpha } => ratio(&|x| (-x / alpha).exp(), 0.0, 80.0 * alpha),
            Family::Pareto { nu, alpha } => {
                // x = alpha / u maps ]alpha, inf[ onto ]0, 1]
                let num = simpson(&|u| alpha.powi(i) * u.powf(nu - 1.0 - i as f64), 0.0, 1.0, 1e-13);
                let den = simpson(&|u| u.powf(nu - 1.0), 0.0, 1.0, 1e-13);
                num / den
            }
            Family::UniformSymmetric => ratio(&|_| 1.0, -SQRT_3, SQRT_3),
            Family::StandardNormal => ratio(&|x| (-0.5 * x * x).exp(), -14.0, 14.0),
            Family::ScaledStudentT { nu } => {
                // y = sqrt(nu) tan(t) turns the t density into cos^(nu+1) t
                let c = ((nu - 2.0) / nu).sqrt() * nu.sqrt();
                let half = std::f64::consts::FRAC_PI_2;
                let num = simpson(
                    &|t: f64| (c * t.sin()).powi(i) * t.cos().abs().powf(nu - 1.0 - i as f64),
                    -half,
                    half,
                    1e-13,
                );
                let den = simpson(&|t: f64| t.cos().abs().powf(nu - 1.0), -half, half, 1e-13);
                num / den
            }
        }
    }

    fn catalog() -> Vec<InnovationSpec> {
        vec![
            InnovationSpec::uniform_positive(2.0).unwrap(),
            InnovationSpec::uniform_positive(0.5).unwrap(),
            InnovationSpec::exponential(1.0).unwrap(),
            InnovationSpec::exponential(0.7).unwrap(),
            InnovationSpec::pareto(12.0, 1.0).unwrap(),
            InnovationSpec::pareto(9.0, 1.3).unwrap(),
            InnovationSpec::uniform_symmetric(),
            InnovationSpec::standard_normal(),
            InnovationSpec::scaled_student_t(30.0).unwrap(),
            InnovationSpec::scaled_student_t(9.0).unwrap(),
        ]
    }

    #[test]
    fn closed_forms_spot_values() {
        let u = InnovationSpec::uniform_positive(1.0).unwrap().raw_moments();
        assert!((u.get(2) - 1.0 / 3.0).abs() < 1e-15);
        let e = InnovationSpec::exponential(1.0).unwrap().raw_moments();
        assert_eq!(e.get(3), 6.0);
        let p = InnovationSpec::pareto(12.0, 1.0).unwrap().raw_moments();
        assert_eq!(p.get(4), 1.5);
        let s = InnovationSpec::uniform_symmetric().raw_moments();
        assert!((s.get(4) - 9.0 / 5.0).abs() < 1e-14);
        let n = InnovationSpec::standard_normal().raw_moments();
        assert_eq!([n.get(2), n.get(4), n.get(6), n.get(8)], [1.0, 3.0, 15.0, 105.0]);
        let t9 = InnovationSpec::scaled_student_t(9.0).unwrap().raw_moments();
        assert!((t9.get(2) - 1.0).abs() < 1e-15);
        assert!((t9.get(4) - 4.2).abs() < 1e-14);
    }

    #[test]
    fn raw_moments_match_quadrature() {
        for spec in catalog() {
            let mu = spec.raw_moments();
            for i in 1..=8 {
                let q = quadrature_moment(&spec, i as i32);
                let exact = mu.get(i);
                if i % 2 == 1 && spec.is_symmetric() {
                    assert!(q.abs() < 1e-9, "{spec} order {i}: {q}");
                } else {
                    let rel = ((q - exact) / exact).abs();
                    assert!(rel < 1e-8, "{spec} order {i}: quad {q} vs {exact} (rel {rel:e})");
                }
            }
        }
    }

    #[test]
    fn uniform_scale_two_to_1e10() {
        let spec = InnovationSpec::uniform_positive(2.0).unwrap();
        let mu = spec.raw_moments();
        for i in 1..=8 {
            let q = quadrature_moment(&spec, i);
            assert!(((q - mu.get(i as usize)) / q).abs() < 1e-10);
        }
    }

    #[test]
    fn student_product_matches_gamma_form() {
        use statrs::function::gamma::ln_gamma;
        for nu in [9.0, 12.5, 30.0] {
            let mu = InnovationSpec::scaled_student_t(nu).unwrap().raw_moments();
            for m in 1..=4usize {
                let mf = m as f64;
                let central = (mf * nu.ln() + ln_gamma(mf + 0.5) + ln_gamma(nu / 2.0 - mf)
                    - 0.5 * std::f64::consts::PI.ln()
                    - ln_gamma(nu / 2.0))
                .exp();
                let scaled = ((nu - 2.0) / nu).powi(m as i32) * central;
                assert!(((scaled - mu.get(2 * m)) / scaled).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_odd_moments_are_exact_zero() {
        for spec in catalog().into_iter().filter(|s| s.is_symmetric()) {
            let mu = spec.raw_moments();
            assert_eq!([mu.get(1), mu.get(3), mu.get(5), mu.get(7)], [0.0; 4]);
        }
    }

    #[test]
    fn moment_vector_invariants() {
        for spec in catalog() {
            let mu = spec.raw_moments();
            assert!(mu.get(2) > 0.0);
            assert!(mu.get(2) >= mu.get(1).powi(2));
            for n in 1..=4 {
                assert!(mu.get(2 * n) >= 0.0);
            }
            if spec.is_non_negative() {
                let chain = [mu.get(1), mu.get(2).sqrt(), mu.get(4).powf(0.25), mu.get(8).powf(0.125)];
                assert!(chain.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-15)), "{spec}: {chain:?}");
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let err = InnovationSpec::pareto(8.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("order 8"), "{err}");
        let err = InnovationSpec::pareto(6.5, 1.0).unwrap_err();
        assert!(err.to_string().contains("order 7"), "{err}");
        assert!(InnovationSpec::scaled_student_t(4.0).is_err());
        assert!(InnovationSpec::uniform_positive(0.0).is_err());
        assert!(InnovationSpec::exponential(-1.0).is_err());
        assert!(InnovationSpec::exponential(f64::NAN).is_err());
        assert!(MomentVector::from_raw([0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).is_err());
        assert!(MomentVector::from_raw([2.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn catalog_names_round_trip() {
        for name in ["uniform0a", "exp", "pareto12", "pareto9", "unif-sym", "normal", "t30", "t9"] {
            let spec = InnovationSpec::from_name(name).unwrap();
            assert_eq!(spec.name(), name);
            assert!(spec.log_moment_exists());
        }
        assert_eq!(InnovationSpec::from_name("uniform").unwrap().name(), "uniform0a");
        assert!(InnovationSpec::from_name("cauchy").is_err());
        assert!(InnovationSpec::from_name("t5").is_err());
    }

    #[test]
    fn frontier_labels() {
        let label = |n: &str| InnovationSpec::from_name(n).unwrap().frontier_label().unwrap();
        assert_eq!(label("uniform0a"), "5^(1/4)");
        assert_eq!(label("exp"), "24^(\u{2212}1/4)");
        assert_eq!(label("pareto12"), "(2/3)^(1/4)");
        assert_eq!(label("pareto9"), "(5/9)^(1/4)");
    }

    #[test]
    fn mean_log_abs_matches_quadrature() {
        // x = a v^2 removes the log singularity at the origin; v ln v -> 0
        let vlog = |v: f64, a: f64| if v == 0.0 { 0.0 } else { 2.0 * v * (a * v * v).ln() };
        let u = InnovationSpec::uniform_positive(0.5).unwrap();
        let q = simpson(&|v| vlog(v, 0.5), 0.0, 1.0, 1e-12);
        assert!((q - u.mean_log_abs().unwrap()).abs() < 1e-9, "{u}");
        let s = InnovationSpec::uniform_symmetric();
        let q = simpson(&|v| vlog(v, SQRT_3), 0.0, 1.0, 1e-12);
        assert!((q - s.mean_log_abs().unwrap()).abs() < 1e-9, "{s}");
        let e = InnovationSpec::exponential(1.0).unwrap();
        let q = simpson(&|v| vlog(v, 1.0) * (-v * v).exp(), 0.0, 9.0, 1e-12);
        assert!((q - e.mean_log_abs().unwrap()).abs() < 1e-9);
        let p = InnovationSpec::pareto(9.0, 2.0).unwrap();
        let q = simpson(&|u: f64| if u == 0.0 { 0.0 } else { (2.0 / u).ln() * 9.0 * u.powi(8) }, 0.0, 1.0, 1e-13);
        assert!((q - p.mean_log_abs().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn student_mean_log_abs_by_simulation() {
        let spec = InnovationSpec::scaled_student_t(9.0).unwrap();
        let mut rng = rng::from_seed(11);
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng).abs().ln()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let se = sd / (n as f64).sqrt();
        assert!((mean - spec.mean_log_abs().unwrap()).abs() < 4.0 * se);
    }

    fn empirical(spec: &InnovationSpec, order: i32, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = rng::from_seed(seed);
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng).powi(order)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn pareto9_sample_mean() {
        let spec = InnovationSpec::pareto(9.0, 1.0).unwrap();
        let (mean, se) = empirical(&spec, 1, 1_000_000, 1);
        assert!((mean - 9.0 / 8.0).abs() < 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn uniform_symmetric_fourth_moment() {
        let spec = InnovationSpec::uniform_symmetric();
        let (m4, se) = empirical(&spec, 4, 1_000_000, 2);
        assert!((m4 - 1.8).abs() < 3.0 * se, "{m4} +- {se}");
    }

    #[test]
    fn normal_odd_moments_vanish() {
        let spec = InnovationSpec::standard_normal();
        for order in [1, 3] {
            let (m, se) = empirical(&spec, order, 1_000_000, 3);
            assert!(m.abs() < 3.0 * se, "order {order}: {m} +- {se}");
        }
    }

    #[test]
    fn empirical_moments_within_four_se() {
        for (k, spec) in catalog().into_iter().enumerate() {
            let mu = spec.raw_moments();
            for order in 1..=4 {
                let (m, se) = empirical(&spec, order, 1_000_000, 100 + k as u64);
                assert!(
                    (m - mu.get(order as usize)).abs() < 4.0 * se,
                    "{spec} order {order}: {m} vs {} (se {se})",
                    mu.get(order as usize)
                );
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        for spec in catalog() {
            let mut a = rng::from_seed(99);
            let mut b = rng::from_seed(99);
            for _ in 0..100 {
                assert_eq!(spec.sample(&mut a).to_bits(), spec.sample(&mut b).to_bits());
            }
        }
    }

    #[test]
    fn innovation_excess_kurtosis() {
        let k = |n: &str| InnovationSpec::from_name(n).unwrap().raw_moments().excess_kurtosis();
        assert!((k("uniform0a") + 1.2).abs() < 1e-12);
        assert!((k("exp") - 6.0).abs() < 1e-12);
        assert!((k("normal")).abs() < 1e-12);
        assert!((k("unif-sym") + 1.2).abs() < 1e-12);
        // 6 / (nu - 4) for Student-t
        assert!((k("t9") - 1.2).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn scale_action(alpha in 0.05f64..20.0, c in 0.05f64..20.0) {
            for spec in [
                InnovationSpec::uniform_positive(alpha).unwrap(),
                InnovationSpec::exponential(alpha).unwrap(),
                InnovationSpec::pareto(10.5, alpha).unwrap(),
            ] {
                let base = spec.raw_moments();
                let scaled = spec.with_scale(c * alpha).unwrap().raw_moments();
                for i in 1..=8 {
                    let expect = c.powi(i as i32) * base.get(i);
                    proptest::prop_assert!(((scaled.get(i) - expect) / expect).abs() < 1e-13);
                }
            }
        }
    }
}
