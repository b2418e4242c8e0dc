//! Boundary data, monotone one-parameter families, and empirical regularity
//! estimators.
//!
//! A [`BoundaryDatum`] is a closed-form rule evaluated at boundary-cell
//! centers. A [`DatumFamily`] generates monotone families {g_t}: members with
//! larger t dominate pointwise, and the vertical-translation kind grows at
//! least linearly in t. The estimators at the bottom measure, over any cell
//! region, the empirical modulus of continuity
//!
//! ```text
//!   omega(delta) = max { |u(x) - u(y)| : |x - y| <= delta }
//! ```
//!
//! and the Hölder quotient sup |u(x) - u(y)| / |x - y|^gamma over separated
//! pairs. Both are plain pair scans with a deterministic stride subsample
//! once a region exceeds 100_000 cells.

use serde::{Deserialize, Serialize};

use crate::energy::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::Grid;

/// Region size above which pair scans subsample with a deterministic stride.
const PAIR_SCAN_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum DatumRule {
    Constant { value: f64 },
    /// coeffs . x + offset, clamped at zero when `clamp` is set.
    Linear {
        coeffs: [f64; 2],
        offset: f64,
        #[serde(default)]
        clamp: bool,
    },
    /// scale * |x - center|^exponent; anchoring `center` on the boundary
    /// makes the datum exactly C^exponent and no better.
    Power {
        center: [f64; 2],
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Finite sample table, interpolated by inverse squared distance
    /// (exact on sample hits).
    Table {
        points: Vec<[f64; 2]>,
        values: Vec<f64>,
    },
    /// `inner` within `radius` of the center, `outer` beyond; the crisp
    /// two-ring datum of annulus experiments.
    RadialStep {
        center: [f64; 2],
        radius: f64,
        inner: f64,
        outer: f64,
    },
    /// Member of a [`DatumFamily`] whose base has no closed-form collapse.
    FamilyMember {
        base: Box<DatumRule>,
        family: FamilyKind,
        rate: f64,
        t: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Boundary datum g >= 0 with its evaluation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDatum {
    pub rule: DatumRule,
    /// Declared nonnegativity; evaluation enforces it.
    #[serde(default = "yes")]
    pub nonnegative: bool,
}

fn yes() -> bool {
    true
}

impl BoundaryDatum {
    pub fn constant(value: f64) -> Self {
        BoundaryDatum {
            rule: DatumRule::Constant { value },
            nonnegative: true,
        }
    }

    pub fn linear(coeffs: [f64; 2], offset: f64) -> Self {
        BoundaryDatum {
            rule: DatumRule::Linear {
                coeffs,
                offset,
                clamp: false,
            },
            nonnegative: true,
        }
    }

    pub fn power(center: [f64; 2], exponent: f64) -> Self {
        BoundaryDatum {
            rule: DatumRule::Power {
                center,
                exponent,
                scale: 1.0,
            },
            nonnegative: true,
        }
    }

    pub fn table(points: Vec<[f64; 2]>, values: Vec<f64>) -> Self {
        BoundaryDatum {
            rule: DatumRule::Table { points, values },
            nonnegative: true,
        }
    }

    pub fn radial_step(center: [f64; 2], radius: f64, inner: f64, outer: f64) -> Self {
        BoundaryDatum {
            rule: DatumRule::RadialStep {
                center,
                radius,
                inner,
                outer,
            },
            nonnegative: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_rule(&self.rule, self.nonnegative)
    }

    /// Evaluates g at a point (expected on or within a cell of the boundary).
    pub fn eval(&self, p: [f64; 2]) -> Result<f64> {
        let v = eval_rule(&self.rule, p)?;
        if self.nonnegative && v < 0.0 {
            return Err(Error::Validation(format!(
                "datum evaluated to {v} < 0 at ({}, {})",
                p[0], p[1]
            )));
        }
        Ok(v)
    }

    /// Values at all boundary cells of a grid.
    pub fn boundary_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.validate()?;
        grid.boundary_cells()
            .iter()
            .map(|&b| self.eval(grid.center(b)))
            .collect()
    }

    /// Max of g over the boundary cells (the "datum-sup" solve start).
    pub fn sup_on_boundary(&self, grid: &Grid) -> Result<f64> {
        Ok(self
            .boundary_values(grid)?
            .into_iter()
            .fold(0.0f64, f64::max))
    }
}

fn validate_rule(rule: &DatumRule, nonneg: bool) -> Result<()> {
    match rule {
        DatumRule::Constant { value } => {
            if !value.is_finite() || (nonneg && *value < 0.0) {
                return Err(Error::Validation(format!(
                    "constant datum {value} is negative or not finite"
                )));
            }
        }
        DatumRule::Linear { coeffs, offset, .. } => {
            if !(coeffs[0].is_finite() && coeffs[1].is_finite() && offset.is_finite()) {
                return Err(Error::Validation("linear datum has non-finite terms".into()));
            }
        }
        DatumRule::Power { exponent, scale, .. } => {
            if !(*exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::Validation(format!(
                    "power datum exponent must be positive, got {exponent}"
                )));
            }
            if nonneg && *scale < 0.0 {
                return Err(Error::Validation("power datum scale is negative".into()));
            }
        }
        DatumRule::Table { points, values } => {
            if points.len() != values.len() || points.is_empty() {
                return Err(Error::Validation(
                    "table datum needs matching, nonempty points/values".into(),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation("table datum has non-finite values".into()));
            }
            if nonneg && values.iter().any(|v| *v < 0.0) {
                return Err(Error::Validation("table datum has a negative value".into()));
            }
        }
        DatumRule::RadialStep {
            radius,
            inner,
            outer,
            ..
        } => {
            if !(*radius > 0.0) {
                return Err(Error::Validation("radial step radius must be positive".into()));
            }
            if nonneg && (*inner < 0.0 || *outer < 0.0) {
                return Err(Error::Validation("radial step values are negative".into()));
            }
        }
        DatumRule::FamilyMember { base, rate, t, .. } => {
            validate_rule(base, nonneg)?;
            if !(*t > 0.0 && *t < 1.0) || !rate.is_finite() {
                return Err(Error::Validation(format!(
                    "family member has t = {t}, rate = {rate}"
                )));
            }
        }
    }
    Ok(())
}

fn eval_rule(rule: &DatumRule, p: [f64; 2]) -> Result<f64> {
    Ok(match rule {
        DatumRule::Constant { value } => *value,
        DatumRule::Linear {
            coeffs,
            offset,
            clamp,
        } => {
            let raw = coeffs[0] * p[0] + coeffs[1] * p[1] + offset;
            if *clamp {
                raw.max(0.0)
            } else {
                raw
            }
        }
        DatumRule::Power {
            center,
            exponent,
            scale,
        } => {
            let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
            scale * r.powf(*exponent)
        }
        DatumRule::Table { points, values } => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (q, v) in points.iter().zip(values) {
                let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                if d2 == 0.0 {
                    return Ok(*v);
                }
                num += v / d2;
                den += 1.0 / d2;
            }
            num / den
        }
        DatumRule::RadialStep {
            center,
            radius,
            inner,
            outer,
        } => {
            let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
            if r <= *radius {
                *inner
            } else {
                *outer
            }
        }
        DatumRule::FamilyMember {
            base,
            family,
            rate,
            t,
        } => {
            let g = eval_rule(base, p)?;
            match family {
                FamilyKind::AdditiveShift => g + t,
                FamilyKind::Scaling => g * t,
                FamilyKind::VerticalTranslation => g + rate * t,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// g_t = g + t; strictly increasing everywhere.
    AdditiveShift,
    /// g_t = t * g; increasing wherever g > 0.
    Scaling,
    /// g_t = g + rate * t with rate >= 1, so g_t - g_s >= t - s.
    VerticalTranslation,
}

/// Monotone family {g_t}, t in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumFamily {
    pub base: BoundaryDatum,
    pub kind: FamilyKind,
    /// Slope for the vertical-translation kind (>= 1); ignored otherwise.
    #[serde(default = "one")]
    pub rate: f64,
    /// Uniform bound M on the members' sup norms.
    pub bound: f64,
}

impl DatumFamily {
    pub fn additive(base: BoundaryDatum, bound: f64) -> Self {
        DatumFamily {
            base,
            kind: FamilyKind::AdditiveShift,
            rate: 1.0,
            bound,
        }
    }

    pub fn scaling(base: BoundaryDatum, bound: f64) -> Self {
        DatumFamily {
            base,
            kind: FamilyKind::Scaling,
            rate: 1.0,
            bound,
        }
    }

    pub fn vertical(base: BoundaryDatum, rate: f64, bound: f64) -> Self {
        DatumFamily {
            base,
            kind: FamilyKind::VerticalTranslation,
            rate,
            bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.kind == FamilyKind::VerticalTranslation && self.rate < 1.0 {
            return Err(Error::Validation(format!(
                "vertical-translation rate must be >= 1, got {}",
                self.rate
            )));
        }
        if !(self.bound > 0.0) {
            return Err(Error::Validation("family bound M must be positive".into()));
        }
        Ok(())
    }

    /// The member g_t; t must lie in (0, 1). Closed-form bases collapse to
    /// closed-form members so serialized specs stay readable.
    pub fn member(&self, t: f64) -> Result<BoundaryDatum> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Argument(format!(
                "family parameter t = {t} not in (0, 1)"
            )));
        }
        self.validate()?;
        let rule = match (&self.base.rule, self.kind) {
            (DatumRule::Constant { value }, FamilyKind::AdditiveShift) => {
                DatumRule::Constant { value: value + t }
            }
            (DatumRule::Constant { value }, FamilyKind::Scaling) => {
                DatumRule::Constant { value: value * t }
            }
            (DatumRule::Constant { value }, FamilyKind::VerticalTranslation) => {
                DatumRule::Constant {
                    value: value + self.rate * t,
                }
            }
            (
                DatumRule::Linear {
                    coeffs,
                    offset,
                    clamp: false,
                },
                FamilyKind::AdditiveShift,
            ) => DatumRule::Linear {
                coeffs: *coeffs,
                offset: offset + t,
                clamp: false,
            },
            (
                DatumRule::Linear {
                    coeffs,
                    offset,
                    clamp: false,
                },
                FamilyKind::Scaling,
            ) => DatumRule::Linear {
                coeffs: [coeffs[0] * t, coeffs[1] * t],
                offset: offset * t,
                clamp: false,
            },
            (base, kind) => DatumRule::FamilyMember {
                base: Box::new(base.clone()),
                family: kind,
                rate: self.rate,
                t,
            },
        };
        Ok(BoundaryDatum {
            rule,
            nonnegative: true,
        })
    }

    /// Verifies sup |g_t| <= M on the boundary cells for a sample of t.
    pub fn check_bound(&self, grid: &Grid, t_sample: &[f64]) -> Result<()> {
        for &t in t_sample {
            let sup = self.member(t)?.sup_on_boundary(grid)?;
            if sup > self.bound + 1e-12 {
                return Err(Error::Validation(format!(
                    "family member at t = {t} has sup {sup} above the bound {}",
                    self.bound
                )));
            }
        }
        Ok(())
    }
}

/// Empirical modulus of continuity as (delta, omega) pairs, delta increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub entries: Vec<(f64, f64)>,
}

impl ModulusCurve {
    pub fn omega_at_smallest(&self) -> f64 {
        self.entries.first().map(|e| e.1).unwrap_or(0.0)
    }

    pub fn omega_at_largest(&self) -> f64 {
        self.entries.last().map(|e| e.1).unwrap_or(0.0)
    }

    /// Omega for the given delta, if present in the table.
    pub fn omega_at(&self, delta: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(d, _)| (d - delta).abs() <= 1e-12 * delta.max(1.0))
            .map(|(_, w)| *w)
    }

    /// Structural invariants: deltas increasing, omega nonnegative and
    /// nondecreasing.
    pub fn check_invariants(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1 - 1e-15)
            && self.entries.iter().all(|e| e.1 >= 0.0)
    }

    /// Pointwise max of curves sharing a delta ladder.
    pub fn envelope(curves: &[ModulusCurve]) -> ModulusCurve {
        let mut entries: Vec<(f64, f64)> = curves
            .first()
            .map(|c| c.entries.clone())
            .unwrap_or_default();
        for c in curves.iter().skip(1) {
            for (slot, e) in entries.iter_mut().zip(&c.entries) {
                slot.1 = slot.1.max(e.1);
            }
        }
        ModulusCurve { entries }
    }
}

/// Deterministic stride subsample indices for oversized regions.
fn subsample(len: usize) -> Vec<usize> {
    if len <= PAIR_SCAN_LIMIT {
        (0..len).collect()
    } else {
        let stride = len.div_ceil(PAIR_SCAN_LIMIT);
        (0..len).step_by(stride).collect()
    }
}

/// Empirical modulus of continuity of point values over a region.
///
/// `deltas` must be positive and strictly increasing; the result is
/// nondecreasing by construction since the pair sets are nested.
pub fn empirical_modulus(
    points: &[[f64; 2]],
    values: &[f64],
    deltas: &[f64],
) -> Result<ModulusCurve> {
    if points.is_empty() || points.len() != values.len() {
        return Err(Error::Argument(
            "empirical_modulus needs a nonempty region with matching values".into(),
        ));
    }
    if deltas.is_empty() || deltas[0] <= 0.0 || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument(
            "deltas must be positive and strictly increasing".into(),
        ));
    }
    let take = subsample(points.len());
    let mut best = vec![0.0f64; deltas.len()];
    for (a, &i) in take.iter().enumerate() {
        for &j in take.iter().skip(a + 1) {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let dist = (dx * dx + dy * dy).sqrt();
            // smallest delta bin that admits this pair
            let bin = deltas.partition_point(|d| *d < dist);
            if bin == deltas.len() {
                continue;
            }
            let diff = (values[i] - values[j]).abs();
            if diff > best[bin] {
                best[bin] = diff;
            }
        }
    }
    // prefix max: omega(delta_k) covers all pairs with dist <= delta_k
    let mut run = 0.0f64;
    let entries = deltas
        .iter()
        .zip(&best)
        .map(|(d, b)| {
            run = run.max(*b);
            (*d, run)
        })
        .collect();
    Ok(ModulusCurve { entries })
}

/// Modulus of a field over a set of cell indices.
pub fn field_modulus(
    field: &ScalarField,
    region: &[usize],
    deltas: &[f64],
) -> Result<ModulusCurve> {
    let grid = field.grid();
    let points: Vec<[f64; 2]> = region.iter().map(|&i| grid.center(i)).collect();
    let values: Vec<f64> = region.iter().map(|&i| field.value(i)).collect();
    empirical_modulus(&points, &values, deltas)
}

/// Modulus of a datum evaluated at a set of cell centers.
pub fn datum_modulus(
    datum: &BoundaryDatum,
    grid: &Grid,
    region: &[usize],
    deltas: &[f64],
) -> Result<ModulusCurve> {
    let points: Vec<[f64; 2]> = region.iter().map(|&i| grid.center(i)).collect();
    let values = region
        .iter()
        .map(|&i| datum.eval(grid.center(i)))
        .collect::<Result<Vec<f64>>>()?;
    empirical_modulus(&points, &values, deltas)
}

/// Hölder quotient sup |u(x)-u(y)| / |x-y|^gamma over pairs separated by at
/// least `min_sep`.
pub fn holder_seminorm(
    points: &[[f64; 2]],
    values: &[f64],
    gamma: f64,
    min_sep: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Argument(format!("gamma = {gamma} not in (0, 1]")));
    }
    if points.len() != values.len() {
        return Err(Error::Argument("points/values length mismatch".into()));
    }
    let take = subsample(points.len());
    let mut sup = f64::NEG_INFINITY;
    for (a, &i) in take.iter().enumerate() {
        for &j in take.iter().skip(a + 1) {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let dist = (dx * dx + dy * dy).sqrt();
            if dist < min_sep {
                continue;
            }
            let q = (values[i] - values[j]).abs() / dist.powf(gamma);
            if q > sup {
                sup = q;
            }
        }
    }
    if sup == f64::NEG_INFINITY {
        return Err(Error::Argument(
            "no pairs at the requested separation".into(),
        ));
    }
    Ok(sup)
}

/// Field wrapper for [`holder_seminorm`]; min_sep must be at least h.
pub fn field_holder_seminorm(
    field: &ScalarField,
    gamma: f64,
    region: &[usize],
    min_sep: f64,
) -> Result<f64> {
    let grid = field.grid();
    if min_sep < grid.h {
        return Err(Error::Argument(format!(
            "min_sep = {min_sep} must be at least the grid spacing {}",
            grid.h
        )));
    }
    let points: Vec<[f64; 2]> = region.iter().map(|&i| grid.center(i)).collect();
    let values: Vec<f64> = region.iter().map(|&i| field.value(i)).collect();
    holder_seminorm(&points, &values, gamma, min_sep)
}

/// Desk-scale proxy for the H^1 bound on a datum: sup norm on the boundary
/// plus the discrete Dirichlet energy of its harmonic extension.
pub fn datum_h1_proxy(grid: &std::sync::Arc<Grid>, datum: &BoundaryDatum) -> Result<f64> {
    let sup = datum.sup_on_boundary(grid)?;
    let ext = crate::solver::harmonic_extension(grid, datum, 1e-10, 100_000)?;
    Ok(sup + crate::energy::dirichlet_energy(&ext))
}
