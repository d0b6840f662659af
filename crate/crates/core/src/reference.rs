//! Closed-form rational functions of `r = alpha * beta` for the four
//! non-negative reference laws: uniform on `]0, alpha[`, exponential with
//! mean `alpha`, and Pareto with shapes 12 and 9.
//!
//! Each formula has the shape
//!
//! ```text
//! scale * r^k * prod(numerator factors) / prod(denominator factors) + offset
//! ```
//!
//! with integer polynomial factors (ascending powers) and a rational scale.
//! Coefficients are kept as exact integers. Evaluation uses compensated
//! Horner in `f64`; [`eval_exact`] evaluates the same expression over
//! arbitrary-precision rationals.
//!
//! The two highest coefficients of the shape-9 `rho_{X^2}` numerator are the
//! ones for `r^12` and `r^13`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::innovations::InnovationSpec;
use crate::lag1::lag1_report;
use crate::moments::{beta_frontier, ModelSpec};

/// Smallest denominator magnitude accepted by [`eval_formula`].
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceFamily {
    Uniform,
    Exponential,
    Pareto12,
    Pareto9,
}

impl ReferenceFamily {
    pub const ALL: [ReferenceFamily; 4] = [
        ReferenceFamily::Uniform,
        ReferenceFamily::Exponential,
        ReferenceFamily::Pareto12,
        ReferenceFamily::Pareto9,
    ];

    /// Innovation law with `alpha = 1`.
    pub fn innovation(self) -> InnovationSpec {
        let spec = match self {
            ReferenceFamily::Uniform => InnovationSpec::uniform_positive(1.0),
            ReferenceFamily::Exponential => InnovationSpec::exponential(1.0),
            ReferenceFamily::Pareto12 => InnovationSpec::pareto(12.0, 1.0),
            ReferenceFamily::Pareto9 => InnovationSpec::pareto(9.0, 1.0),
        };
        spec.expect("catalog parameters are valid")
    }

    /// Matching reference family for a scale-family innovation, if any.
    pub fn for_innovation(spec: &InnovationSpec) -> Option<Self> {
        let unit = spec.with_scale(1.0).ok()?;
        Self::ALL.into_iter().find(|f| f.innovation() == unit)
    }

    /// Upper end of the stationarity interval in `r`.
    pub fn r_max(self) -> f64 {
        beta_frontier(&self.innovation().raw_moments())
    }

    pub fn name(self) -> &'static str {
        match self {
            ReferenceFamily::Uniform => "uniform0a",
            ReferenceFamily::Exponential => "exp",
            ReferenceFamily::Pareto12 => "pareto12",
            ReferenceFamily::Pareto9 => "pareto9",
        }
    }

    pub fn formula(self, role: Role) -> &'static RationalFormula {
        FORMULAS
            .iter()
            .find(|f| f.family == self && f.role == role)
            .expect("every family has every role")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Rho1,
    Rho1Sq,
    Kurtosis,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Rho1, Role::Rho1Sq, Role::Kurtosis];

    pub fn name(self) -> &'static str {
        match self {
            Role::Rho1 => "rho1",
            Role::Rho1Sq => "rho1_sq",
            Role::Kurtosis => "kurtosis",
        }
    }
}

/// An integer polynomial raised to a power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factor {
    /// Ascending powers of `r`.
    pub coeffs: &'static [i64],
    pub power: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalFormula {
    pub family: ReferenceFamily,
    pub role: Role,
    /// `[numerator, denominator]`
    pub scale: [i64; 2],
    pub r_power: u32,
    pub numerator: &'static [Factor],
    pub denominator: &'static [Factor],
    pub offset: i64,
}

const fn once(coeffs: &'static [i64]) -> Factor {
    Factor { coeffs, power: 1 }
}

const fn squared(coeffs: &'static [i64]) -> Factor {
    Factor { coeffs, power: 2 }
}

// uniform on ]0, alpha[
const U_RHO1_NUM: &[i64] = &[-180, 120, -51, -4, 1];
const U_RHO1_DEN: &[i64] = &[-180, 180, -177, 12, 7];
const U_N: &[i64] = &[
    -604800, -480600, -155700, -257400, -2490, 48525, -6270, 6810, 10620, 11384, 4012, -586, 94,
    -53, 6,
];
const U_D: &[i64] = &[
    50400, 12600, 35700, 40200, 13490, 14015, 8360, -5210, -5999, -2407, -720, 114, 177, -8,
];
const U_K_N: &[i64] = &[
    907200, -1814400, 4284000, -4510800, 3254460, -2030520, 1973540, -617175, -185700, 371005,
    -236308, 78747, -11496, 511,
];

// exponential with mean alpha
const E_RHO1_NUM: &[i64] = &[2, -3, 7, -6, 2];
const E_RHO1_DEN: &[i64] = &[1, -2, 19, -20, 6];
const E_N: &[i64] = &[
    -5, -80, 65, -112, -1184, -5774, 10848, 12720, -9408, -17880, -16272, 52992, 9216, -46656,
    17280,
];
const E_D: &[i64] = &[
    -5, 2, -21, -602, -9060, 11126, 13252, -26448, 16368, 13896, -12192, 13824, -12672, 4032,
];
const E_K_N: &[i64] = &[
    3, -12, 52, -134, 11815, -36752, 44802, 1062, -42648, 17028, 12240, 5616, -17280, 6048,
];

// Pareto, shape 12
const P12_RHO1_NUM: &[i64] = &[6050, -10230, 13035, -7524, 1296];
const P12_RHO1_DEN: &[i64] = &[36300, -79200, 219255, -171160, 29472];
const P12_N: &[i64] = &[
    -7043652000,
    -5638479000,
    -1900483200,
    -6228372150,
    -3064649280,
    2622844140,
    24533447400,
    19854650865,
    11360213480,
    -16340416020,
    -30235824828,
    23037530976,
    7650162960,
    -11215587456,
    2802615552,
];
const P12_D: &[i64] = &[
    -58697100, 14229600, -142425360, -468153840, -218936564, 536116224, 616017864, 374454192,
    130906149, -805701976, -15605040, 401099652, -245871648, 48736320,
];
const P12_K_N: &[i64] = &[
    599933276250,
    -2617890660000,
    4970166270300,
    -5546727078200,
    59041720498845,
    -161234870633760,
    126074334149694,
    2238307939140,
    25296348317400,
    -57875913071352,
    -89078826937116,
    180941306693040,
    -102607682886720,
    19713391884288,
];

// Pareto, shape 9
const P9_RHO1_NUM: &[i64] = &[15680, -27720, 39564, -27864, 6561];
const P9_RHO1_DEN: &[i64] = &[47040, -105840, 343119, -315504, 73791];
const P9_N: &[i64] = &[
    -67737600,
    -83339200,
    19038600,
    -88401600,
    -148138920,
    -511287075,
    1466330040,
    1499354145,
    -1537629480,
    -1966005837,
    -602608896,
    3869347563,
    -61620912,
    -2818841796,
    1179090432,
];
const P9_D: &[i64] = &[
    -627200, 235200, -1650600, -8601600, -13809280, 31729095, 27010080, -23002305, -21773448,
    -24182469, 58517640, 9248823, -50143536, 19665504,
];
const P9_K_N: &[i64] = &[
    62449049600,
    -281020723200,
    532657440000,
    -582241598400,
    25718506014670,
    -92872063045440,
    100396353649230,
    -6337711636725,
    -8536591340550,
    -41782534519365,
    -62336742758694,
    195729014255481,
    -145385404543008,
    35664808109193,
];
const P9_K_D: &[i64] = &[15680, -35280, 114373, -105168, 24597];

/// All twelve formulas.
pub static FORMULAS: [RationalFormula; 12] = [
    RationalFormula {
        family: ReferenceFamily::Uniform,
        role: Role::Rho1,
        scale: [1, 1],
        r_power: 1,
        numerator: &[once(U_RHO1_NUM)],
        denominator: &[once(U_RHO1_DEN)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Uniform,
        role: Role::Rho1Sq,
        scale: [-1, 12],
        r_power: 1,
        numerator: &[once(U_N)],
        denominator: &[once(U_D)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Uniform,
        role: Role::Kurtosis,
        scale: [-3, 7],
        r_power: 0,
        numerator: &[once(&[-3, 0, 1]), once(U_K_N)],
        denominator: &[once(&[-4, 0, 0, 1]), once(&[-5, 0, 0, 0, 1]), squared(U_RHO1_DEN)],
        offset: -3,
    },
    RationalFormula {
        family: ReferenceFamily::Exponential,
        role: Role::Rho1,
        scale: [2, 1],
        r_power: 1,
        numerator: &[once(E_RHO1_NUM)],
        denominator: &[once(E_RHO1_DEN)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Exponential,
        role: Role::Rho1Sq,
        scale: [2, 1],
        r_power: 1,
        numerator: &[once(E_N)],
        denominator: &[once(E_D)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Exponential,
        role: Role::Kurtosis,
        scale: [-3, 1],
        r_power: 0,
        numerator: &[once(&[-1, 0, 2]), once(E_K_N)],
        denominator: &[once(&[-1, 0, 0, 6]), once(&[-1, 0, 0, 0, 24]), squared(E_RHO1_DEN)],
        offset: -3,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto12,
        role: Role::Rho1,
        scale: [44, 3],
        r_power: 1,
        numerator: &[once(P12_RHO1_NUM)],
        denominator: &[once(P12_RHO1_DEN)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto12,
        role: Role::Rho1Sq,
        scale: [1, 55],
        r_power: 1,
        numerator: &[once(P12_N)],
        denominator: &[once(P12_D)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto12,
        role: Role::Kurtosis,
        scale: [-2, 49],
        r_power: 0,
        numerator: &[once(&[-5, 0, 6]), once(P12_K_N)],
        denominator: &[once(&[-3, 0, 0, 4]), once(&[-2, 0, 0, 0, 3]), squared(P12_RHO1_DEN)],
        offset: -3,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto9,
        role: Role::Rho1,
        scale: [8, 1],
        r_power: 1,
        numerator: &[once(P9_RHO1_NUM)],
        denominator: &[once(P9_RHO1_DEN)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto9,
        role: Role::Rho1Sq,
        scale: [1, 48],
        r_power: 1,
        numerator: &[once(P9_N)],
        denominator: &[once(P9_D)],
        offset: 0,
    },
    RationalFormula {
        family: ReferenceFamily::Pareto9,
        role: Role::Kurtosis,
        scale: [1, 9],
        r_power: 0,
        numerator: &[once(&[7, 0, -9]), once(P9_K_N)],
        denominator: &[once(&[-2, 0, 0, 3]), once(&[-5, 0, 0, 0, 9]), squared(P9_K_D)],
        offset: -3,
    },
];

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated Horner evaluation of `sum coeffs[i] x^i`.
pub fn horner(coeffs: &[i64], x: f64) -> f64 {
    let Some((&last, rest)) = coeffs.split_last() else {
        return 0.0;
    };
    let mut s = last as f64;
    let mut c = 0.0;
    for &a in rest.iter().rev() {
        let (p, pi) = two_prod(s, x);
        let (next, sigma) = two_sum(p, a as f64);
        s = next;
        c = c * x + (pi + sigma);
    }
    s + c
}

impl RationalFormula {
    fn check_domain(&self, r: f64) -> Result<()> {
        let r_max = self.family.r_max();
        if !(r > 0.0 && r < r_max) {
            return Err(Error::Domain(format!(
                "r = {r} outside the stationarity interval ]0, {r_max}[ of {}",
                self.family.name()
            )));
        }
        Ok(())
    }
}

/// Evaluates a formula at `r` strictly inside its family's interval.
pub fn eval_formula(formula: &RationalFormula, r: f64) -> Result<f64> {
    formula.check_domain(r)?;
    let factor = |f: &Factor| horner(f.coeffs, r).powi(f.power as i32);
    let num = formula.scale[0] as f64
        * r.powi(formula.r_power as i32)
        * formula.numerator.iter().map(factor).product::<f64>();
    let den = formula.scale[1] as f64 * formula.denominator.iter().map(factor).product::<f64>();
    if !(den.abs() >= DENOMINATOR_FLOOR) {
        return Err(Error::DenominatorPole { r, value: den });
    }
    Ok(num / den + formula.offset as f64)
}

/// Exact rational value of a formula at the binary value of `r`.
pub fn eval_exact(formula: &RationalFormula, r: f64) -> Result<BigRational> {
    formula.check_domain(r)?;
    let x = BigRational::from_float(r).expect("finite r");
    let poly = |f: &Factor| {
        let mut acc = BigRational::zero();
        for &c in f.coeffs.iter().rev() {
            acc = acc * &x + BigRational::from_integer(BigInt::from(c));
        }
        num_traits::pow(acc, f.power as usize)
    };
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let mut num = int(formula.scale[0]) * num_traits::pow(x.clone(), formula.r_power as usize);
    for f in formula.numerator {
        num *= poly(f);
    }
    let mut den = int(formula.scale[1]);
    for f in formula.denominator {
        den *= poly(f);
    }
    if den.is_zero() {
        return Err(Error::DenominatorPole { r, value: 0.0 });
    }
    Ok(num / den + int(formula.offset))
}

/// [`eval_exact`] rounded to `f64`.
pub fn eval_exact_f64(formula: &RationalFormula, r: f64) -> Result<f64> {
    let v = eval_exact(formula, r)?;
    v.to_f64()
        .ok_or_else(|| Error::Numeric("exact value not representable".into()))
}

/// `rho_X(1) - rho_{X^2}(1)` from the closed forms.
pub fn delta_poly(family: ReferenceFamily, r: f64) -> Result<f64> {
    Ok(eval_formula(family.formula(Role::Rho1), r)? - eval_formula(family.formula(Role::Rho1Sq), r)?)
}

/// Excess kurtosis from the closed form.
pub fn kurtosis_poly(family: ReferenceFamily, r: f64) -> Result<f64> {
    eval_formula(family.formula(Role::Kurtosis), r)
}

/// Largest discrepancy between the generic engine and one closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub family: ReferenceFamily,
    pub role: Role,
    pub max_rel_error: f64,
    /// Grid point where the maximum occurs.
    pub at_r: f64,
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

/// Compares the generic lag-1 analytics with every closed form on
/// `r = r_max * i / (points + 1)`, `i = 1..=points`.
pub fn cross_validate(points: usize) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::with_capacity(12);
    for family in ReferenceFamily::ALL {
        let spec = family.innovation();
        let r_max = family.r_max();
        let mut worst = [(0.0, 0.0); 3];
        for i in 1..=points {
            let r = r_max * i as f64 / (points + 1) as f64;
            let generic = lag1_report(&spec, &ModelSpec::first_order(r)?)?;
            let values = [generic.rho1, generic.rho1_sq, generic.excess_kurtosis];
            for (k, role) in Role::ALL.into_iter().enumerate() {
                let e = relative_error(values[k], eval_formula(family.formula(role), r)?);
                if e > worst[k].0 || i == 1 {
                    worst[k] = (e, r);
                }
            }
        }
        for (k, role) in Role::ALL.into_iter().enumerate() {
            out.push(Discrepancy { family, role, max_rel_error: worst[k].0, at_r: worst[k].1 });
        }
    }
    Ok(out)
}

/// All formulas as a JSON array.
pub fn formulas_json() -> serde_json::Value {
    serde_json::to_value(&FORMULAS[..]).expect("formulas serialize")
}

/// Distance in units in the last place.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_sign_negative() != b.is_sign_negative() {
        return ulp_distance(a.abs(), 0.0) + ulp_distance(b.abs(), 0.0);
    }
    let (x, y) = (a.abs().to_bits(), b.abs().to_bits());
    x.abs_diff(y)
}
