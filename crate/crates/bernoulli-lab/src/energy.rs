//! The discrete one-phase energy: Dirichlet term, positivity measure, total
//! energy, and the single-cell minimization used by the relaxation solver.
//!
//! The Dirichlet term sums forward differences over lattice edges whose
//! endpoints are both non-exterior. Edges with at least one interior endpoint
//! carry the full dual volume h^d; edges joining two boundary cells run
//! tangentially along the rim and carry h^d / 2. With that trapezoid-style
//! weighting the quadrature is exact on affine fields over box domains
//! (u = x on the unit square integrates to exactly 1 for any h).
//!
//! The measure term counts interior cells with value above a threshold times
//! h^d; boundary cells belong to the datum and are never counted.

use std::sync::Arc;

use crate::boundary::BoundaryDatum;
use crate::error::{Error, Result};
use crate::geometry::{CellLabel, Grid};

/// Values at or below this magnitude count as zero for positivity masks. The
/// relaxation tie-break writes exact zeros; the tolerance only guards against
/// rounding introduced by harmonic averaging.
pub const VALUE_TOL: f64 = 1e-12;

/// A candidate or computed minimizer on a grid, with boundary values baked
/// into its boundary cells.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    lambda: f64,
}

impl ScalarField {
    /// Field with the datum on boundary cells and a constant interior fill.
    pub fn from_datum(
        grid: &Arc<Grid>,
        datum: &BoundaryDatum,
        fill: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Argument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let mut values = vec![0.0; grid.num_cells()];
        for &i in grid.interior_cells() {
            values[i] = fill;
        }
        for &b in grid.boundary_cells() {
            let v = datum.eval(grid.center(b))?;
            if v < 0.0 {
                return Err(Error::Validation(format!("datum is negative at cell {b}")));
            }
            values[b] = v;
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
            lambda,
        })
    }

    /// Field from raw per-cell values (exterior entries are ignored).
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>, lambda: f64) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(Error::Argument(format!(
                "value vector has {} entries, grid has {} cells",
                values.len(),
                grid.num_cells()
            )));
        }
        if values
            .iter()
            .enumerate()
            .any(|(i, v)| grid.label(i) != CellLabel::Exterior && !v.is_finite())
        {
            return Err(Error::Validation("field has non-finite values".into()));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
            lambda,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Max |difference| on boundary cells against another field.
    pub fn boundary_distance(&self, other: &ScalarField) -> f64 {
        self.grid
            .boundary_cells()
            .iter()
            .map(|&b| (self.values[b] - other.values[b]).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise (max, min) with another field on the same grid.
    pub fn max_min(&self, other: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "max/min of fields on different grids".into(),
            ));
        }
        let mut hi = self.clone();
        let mut lo = other.clone();
        for i in 0..self.values.len() {
            let (a, b) = (self.values[i], other.values[i]);
            hi.values[i] = a.max(b);
            lo.values[i] = a.min(b);
        }
        Ok((hi, lo))
    }

    /// Max |difference| over non-exterior cells.
    pub fn max_norm_distance(&self, other: &ScalarField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "comparing fields on different grids".into(),
            ));
        }
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            if self.grid.label(i) != CellLabel::Exterior {
                worst = worst.max((self.values[i] - other.values[i]).abs());
            }
        }
        Ok(worst)
    }

    /// Min of (other - self) over non-exterior cells, with the argmin cell.
    pub fn min_gap_to(&self, other: &ScalarField) -> Result<(f64, usize)> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "comparing fields on different grids".into(),
            ));
        }
        let mut min = f64::INFINITY;
        let mut at = 0;
        for i in 0..self.values.len() {
            if self.grid.label(i) == CellLabel::Exterior {
                continue;
            }
            let gap = other.values[i] - self.values[i];
            if gap < min {
                min = gap;
                at = i;
            }
        }
        Ok((min, at))
    }

    /// Non-exterior cell indices (interior then boundary), the closed-domain
    /// region used by moduli and Hölder scans.
    pub fn closed_region(&self) -> Vec<usize> {
        let mut region: Vec<usize> = self.grid.interior_cells().to_vec();
        region.extend_from_slice(self.grid.boundary_cells());
        region
    }
}

/// Dirichlet edge weights: full dual volume when an endpoint is interior,
/// half for rim (boundary-boundary) edges, zero across exterior cells.
fn edge_weight(la: CellLabel, lb: CellLabel) -> f64 {
    match (la, lb) {
        (CellLabel::Exterior, _) | (_, CellLabel::Exterior) => 0.0,
        (CellLabel::Boundary, CellLabel::Boundary) => 0.5,
        _ => 1.0,
    }
}

/// Discrete Dirichlet energy: sum over forward-difference edges of
/// ((u_i - u_j) / h)^2 times the edge volume.
pub fn dirichlet_energy(u: &ScalarField) -> f64 {
    let grid = u.grid();
    let (nx, ny) = (grid.n[0], grid.n[1]);
    let h = grid.h;
    let vol = grid.cell_volume();
    let inv_h2 = 1.0 / (h * h);
    let vals = u.values();
    let mut sum = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            let li = grid.label(i);
            if li == CellLabel::Exterior {
                continue;
            }
            if ix + 1 < nx {
                let w = edge_weight(li, grid.label(i + 1));
                if w > 0.0 {
                    let d = vals[i + 1] - vals[i];
                    sum += w * d * d * inv_h2 * vol;
                }
            }
            if ny > 1 && iy + 1 < ny {
                let w = edge_weight(li, grid.label(i + nx));
                if w > 0.0 {
                    let d = vals[i + nx] - vals[i];
                    sum += w * d * d * inv_h2 * vol;
                }
            }
        }
    }
    sum
}

/// Measure of the positivity set: interior cells with value > threshold,
/// times h^d.
pub fn positivity_measure(u: &ScalarField, threshold: f64) -> f64 {
    let grid = u.grid();
    let count = grid
        .interior_cells()
        .iter()
        .filter(|&&i| u.value(i) > threshold)
        .count();
    count as f64 * grid.cell_volume()
}

/// Total energy: Dirichlet + lambda * positivity measure (strict threshold).
pub fn total_energy(u: &ScalarField, lambda: f64) -> f64 {
    dirichlet_energy(u) + lambda * positivity_measure(u, 0.0)
}

/// Outcome of the 0-versus-neighbor-mean branch at one interior cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalUpdate {
    pub new_value: f64,
    /// Local energy change (new minus old) over the cell's incident edges
    /// and its own measure term; equals the global energy change.
    pub energy_delta: f64,
}

/// Minimizes the local energy of one interior cell over v in {0, mean of
/// stencil neighbors}. Ties resolve to 0, which keeps sweep-from-zero solves
/// minimal.
pub fn local_update(u: &ScalarField, cell: usize, lambda: f64) -> Result<LocalUpdate> {
    let grid = u.grid();
    if grid.label(cell) != CellLabel::Interior {
        return Err(Error::Argument(format!("cell {cell} is not interior")));
    }
    Ok(local_update_raw(
        grid,
        u.values(),
        cell,
        lambda,
        grid.h,
        grid.cell_volume(),
    ))
}

/// Inner kernel shared with the solver's sweep loop. `cell` must be interior.
///
/// The local energy of value v is
///   sum over stencil neighbors j of ((v - u_j)/h)^2 h^d + lambda h^d [v > 0]
/// whose positive branch is minimized at the neighbor mean; the branch test
/// reduces to k * mean^2 > lambda * h^2 with k the neighbor count.
#[inline]
pub(crate) fn local_update_raw(
    grid: &Grid,
    vals: &[f64],
    cell: usize,
    lambda: f64,
    h: f64,
    vol: f64,
) -> LocalUpdate {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut k = 0.0;
    for nb in grid.stencil(cell) {
        let v = vals[nb];
        sum += v;
        sumsq += v * v;
        k += 1.0;
    }
    let mean = sum / k;
    let inv_h2 = 1.0 / (h * h);
    let energy_at = |v: f64| -> f64 {
        let quad = (k * v * v - 2.0 * v * sum + sumsq) * inv_h2 * vol;
        if v > 0.0 {
            quad + lambda * vol
        } else {
            quad
        }
    };
    let e_zero = energy_at(0.0);
    let e_mean = energy_at(mean);
    let new_value = if mean > 0.0 && e_mean < e_zero {
        mean
    } else {
        0.0
    };
    let energy_delta = energy_at(new_value) - energy_at(vals[cell]);
    LocalUpdate {
        new_value,
        energy_delta,
    }
}
