//! Location of the sub-intervals of the stationarity domain where
//! `delta(r) = rho_X(1) - rho_{X^2}(1)` is positive, plus the `(r, delta, K)`
//! sweeps behind the delta and kurtosis curves.
//!
//! The domain `]0, r_max[` is scanned on a uniform grid that stays
//! `r_max * 1e-6` away from both ends. Every sign change between adjacent
//! grid points is bisected until the bracket half-width is at most `tol`;
//! the bracket itself is the certificate for the root.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::innovations::{InnovationSpec, MomentVector};
use crate::lag1::lag1_from_moments;
use crate::moments::{beta_frontier, x_moments, ModelSpec};
use crate::reference::{delta_poly, kurtosis_poly, ReferenceFamily};

pub const DEFAULT_GRID_POINTS: usize = 100_000;
pub const MIN_GRID_POINTS: usize = 1_000;

/// Brackets whose ends are both smaller than this cannot be resolved.
pub const FLAT_THRESHOLD: f64 = 1e-14;

/// Relative distance of the first and last grid points from the domain ends.
pub const EDGE_FRACTION: f64 = 1e-6;

/// Where `delta` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    /// Generic moment recursion and cross moments.
    Generic,
    /// Closed-form rational functions (reference families only).
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    /// Certified sign change of `delta`.
    Root,
    /// End of the domain; `delta -> 0` at `r = 0`, the stationarity frontier at `r_max`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_radius: f64,
    pub hi_radius: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorRegion {
    pub family: String,
    /// `[0, r_max]`, both ends excluded.
    pub domain: [f64; 2],
    pub intervals: Vec<Interval>,
}

impl TaylorRegion {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("region serializes")
    }
}

/// `delta(r)` and `K(r)` for a scale family at unit scale.
#[derive(Debug, Clone)]
pub struct DeltaCurve {
    name: String,
    mu: MomentVector,
    reference: Option<ReferenceFamily>,
    source: DeltaSource,
    r_max: f64,
}

impl DeltaCurve {
    pub fn new(spec: &InnovationSpec, source: DeltaSource) -> Result<Self> {
        let unit = spec.with_scale(1.0).map_err(|_| {
            Error::Domain(format!(
                "{} is not a scale family; regions are defined in r = alpha * beta",
                spec.name()
            ))
        })?;
        let reference = ReferenceFamily::for_innovation(&unit);
        if source == DeltaSource::Printed && reference.is_none() {
            return Err(Error::Domain(format!("no closed-form formulas for {}", spec.name())));
        }
        let mu = unit.raw_moments();
        Ok(Self { name: unit.name(), mu, reference, source, r_max: beta_frontier(&mu) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn delta(&self, r: f64) -> Result<f64> {
        match (self.source, self.reference) {
            (DeltaSource::Printed, Some(family)) => delta_poly(family, r),
            _ => Ok(lag1_from_moments(&ModelSpec::first_order(r)?, &self.mu)?.delta),
        }
    }

    pub fn kurtosis(&self, r: f64) -> Result<f64> {
        match (self.source, self.reference) {
            (DeltaSource::Printed, Some(family)) => kurtosis_poly(family, r),
            _ => Ok(x_moments(&ModelSpec::first_order(r)?, &self.mu)?.excess_kurtosis),
        }
    }
}

/// Uniform grid of `n` points over `[r_max * 1e-6, r_max * (1 - 1e-6)]`.
pub fn scan_grid(r_max: f64, n: usize) -> Vec<f64> {
    let edge = r_max * EDGE_FRACTION;
    let step = (r_max - 2.0 * edge) / (n.max(2) - 1) as f64;
    (0..n).map(|i| edge + i as f64 * step).collect()
}

struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    fn centre(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, lo_positive: bool, tol: f64) -> Result<Bracket>
where
    F: Fn(f64) -> Result<f64>,
{
    while 0.5 * (hi - lo) > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid)? > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// Positive-`delta` intervals of an arbitrary function on `]0, r_max[`.
pub fn find_regions_with<F>(
    label: &str,
    r_max: f64,
    grid_points: usize,
    tol: f64,
    delta: F,
) -> Result<TaylorRegion>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::Domain(format!(
            "grid_points = {grid_points} below the minimum of {MIN_GRID_POINTS}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let grid = scan_grid(r_max, grid_points);
    let values = grid.par_iter().map(|&r| delta(r)).collect::<Result<Vec<f64>>>()?;
    let positive: Vec<bool> = values.iter().map(|v| *v > 0.0).collect();

    // root between grid[i] and grid[i + 1]
    let root_after = |i: usize| -> Result<Bracket> {
        if values[i].abs() < FLAT_THRESHOLD && values[i + 1].abs() < FLAT_THRESHOLD {
            return Err(Error::UnresolvedBracket { lo: grid[i], hi: grid[i + 1] });
        }
        bisect(&delta, grid[i], grid[i + 1], positive[i], tol)
    };

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !positive[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && positive[i + 1] {
            i += 1;
        }
        let (lo, lo_radius, lo_kind) = if start == 0 {
            (0.0, 0.0, EndpointKind::Boundary)
        } else {
            let b = root_after(start - 1)?;
            (b.centre(), b.radius(), EndpointKind::Root)
        };
        let (hi, hi_radius, hi_kind) = if i == grid.len() - 1 {
            (r_max, 0.0, EndpointKind::Boundary)
        } else {
            let b = root_after(i)?;
            (b.centre(), b.radius(), EndpointKind::Root)
        };
        intervals.push(Interval { lo, hi, lo_radius, hi_radius, lo_kind, hi_kind });
        i += 1;
    }
    Ok(TaylorRegion { family: label.to_string(), domain: [0.0, r_max], intervals })
}

/// Positive-`delta` intervals of a scale family in `r = alpha * beta`.
pub fn find_regions(
    spec: &InnovationSpec,
    source: DeltaSource,
    grid_points: usize,
    tol: f64,
) -> Result<TaylorRegion> {
    let curve = DeltaCurve::new(spec, source)?;
    find_regions_with(curve.name(), curve.r_max(), grid_points, tol, |r| curve.delta(r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub r: f64,
    pub delta: f64,
    pub kurtosis: f64,
}

fn sweep_on(curve: &DeltaCurve, grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&r| {
            Ok(SweepRow {
                family: curve.name().to_string(),
                r,
                delta: curve.delta(r)?,
                kurtosis: curve.kurtosis(r)?,
            })
        })
        .collect()
}

/// `(r, delta, K)` on the scan grid of one scale family.
pub fn sweep_delta(
    spec: &InnovationSpec,
    source: DeltaSource,
    grid_points: usize,
) -> Result<Vec<SweepRow>> {
    let curve = DeltaCurve::new(spec, source)?;
    sweep_on(&curve, &scan_grid(curve.r_max(), grid_points))
}

/// Pareto sweeps for several shapes on one grid spanning the smallest
/// domain among them (the heaviest tail).
pub fn sweep_pareto_shapes(nus: &[f64], grid_points: usize) -> Result<Vec<SweepRow>> {
    let curves = nus
        .iter()
        .map(|&nu| DeltaCurve::new(&InnovationSpec::pareto(nu, 1.0)?, DeltaSource::Generic))
        .collect::<Result<Vec<_>>>()?;
    let r_max = curves
        .iter()
        .map(DeltaCurve::r_max)
        .fold(f64::INFINITY, f64::min);
    if !r_max.is_finite() {
        return Err(Error::Domain("no Pareto shapes given".into()));
    }
    let grid = scan_grid(r_max, grid_points);
    let mut rows = Vec::with_capacity(grid.len() * curves.len());
    for curve in &curves {
        rows.extend(sweep_on(curve, &grid)?);
    }
    Ok(rows)
}

/// Fixed 12-significant-digit rendering used by every CSV output.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "family,r,delta,kurtosis")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.family,
            fmt_num(row.r),
            fmt_num(row.delta),
            fmt_num(row.kurtosis)
        )?;
    }
    Ok(())
}
