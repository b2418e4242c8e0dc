//! Thresholded coordinate relaxation for the discrete one-phase energy.
//!
//! Each sweep visits every interior cell and applies the 0-versus-mean branch
//! of [`crate::energy::local_update`]: the cell takes the stencil-neighbor
//! mean when that strictly lowers its local energy, and zero otherwise (ties
//! resolve to zero). The rule descends the exact discrete functional, needs
//! no smoothing parameter, and produces the free boundary by construction.
//! The update is monotone in the neighbor values, so solves started from
//! ordered initializations with ordered data stay ordered sweep by sweep;
//! the lower/upper extreme solves and the comparison checks rely on that.
//!
//! Convergence is declared on the max per-cell change per sweep. A stall
//! guard stops iteration when the energy decrease stays below 1e-14 for ten
//! consecutive sweeps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryDatum;
use crate::energy::{positivity_measure, total_energy, ScalarField, VALUE_TOL};
use crate::error::{Error, Result};
use crate::geometry::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Traversal {
    Lexicographic,
    /// Fixed color order (even parity first), lexicographic within a color.
    RedBlack,
}

#[derive(Debug, Clone)]
pub enum Initialization {
    Zero,
    /// Constant fill at the datum's boundary sup.
    DatumSup,
    /// Plain (unthresholded) harmonic extension of the datum.
    Harmonic,
    Given(ScalarField),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub lambda: f64,
    pub max_sweeps: usize,
    /// Max per-cell change per sweep at which the solve counts as converged.
    pub tolerance: f64,
    pub init: Initialization,
    pub traversal: Traversal,
    /// Record the exact total energy after every sweep (costly; tests only).
    pub record_energy_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            lambda: 1.0,
            max_sweeps: 400_000,
            tolerance: 1e-8,
            init: Initialization::Zero,
            traversal: Traversal::RedBlack,
            record_energy_trace: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        if self.max_sweeps < 1 {
            return Err(Error::Config("max sweeps must be at least 1".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        Ok(())
    }

    pub fn with_init(mut self, init: Initialization) -> Self {
        self.init = init;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Single,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub energy: f64,
    pub sweeps: usize,
    pub residual: f64,
    pub positivity_measure: f64,
    pub converged: bool,
    pub mode: SolveMode,
    /// Exact per-sweep energies when requested in the options.
    #[serde(skip)]
    pub energy_trace: Vec<f64>,
}

/// Plain harmonic extension of the datum by SOR (no thresholding), used for
/// the harmonic initialization and the H^1 proxy of a datum. Negative
/// overshoots are clamped at zero on exit.
pub fn harmonic_extension(
    grid: &Arc<Grid>,
    datum: &BoundaryDatum,
    tol: f64,
    max_sweeps: usize,
) -> Result<ScalarField> {
    let mut field = ScalarField::from_datum(grid, datum, 0.0, 1.0)?;
    let plan = SweepPlan::new(grid);
    let (lo, hi) = grid.spec.bounding_box();
    let extent = (hi[0] - lo[0]).max(if grid.dimension() == 2 {
        hi[1] - lo[1]
    } else {
        0.0
    });
    let omega = 2.0 / (1.0 + (std::f64::consts::PI * grid.h / extent).sin());
    let inv_k = 1.0 / plan.k as f64;
    let vals = field.values_mut();
    for _ in 0..max_sweeps {
        let mut residual = 0.0f64;
        for (c, nb) in plan.cells.iter().zip(&plan.nbrs) {
            let i = *c as usize;
            let mut s = 0.0;
            for &n in nb.iter().take(plan.k) {
                s += vals[n as usize];
            }
            let mean = s * inv_k;
            let old = vals[i];
            let new = old + omega * (mean - old);
            vals[i] = new;
            let change = (new - old).abs();
            if change > residual {
                residual = change;
            }
        }
        if residual <= tol {
            break;
        }
    }
    for v in vals.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(field)
}

/// Precomputed interior traversal with stencil neighbor indices.
struct SweepPlan {
    cells: Vec<u32>,
    nbrs: Vec<[u32; 4]>,
    k: usize,
}

impl SweepPlan {
    fn new(grid: &Grid) -> SweepPlan {
        let nx = grid.n[0] as u32;
        let one_d = grid.dimension() == 1;
        let k = if one_d { 2 } else { 4 };
        let mut cells = Vec::with_capacity(grid.interior_cells().len());
        let mut nbrs = Vec::with_capacity(grid.interior_cells().len());
        for &i in grid.interior_cells() {
            let i = i as u32;
            cells.push(i);
            nbrs.push(if one_d {
                [i - 1, i + 1, 0, 0]
            } else {
                [i - 1, i + 1, i - nx, i + nx]
            });
        }
        SweepPlan { cells, nbrs, k }
    }

    /// Reorders in red-black fashion: even (ix + iy) parity first.
    fn red_black(&mut self, grid: &Grid) {
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        let parity = |idx: u32| -> u8 {
            let (ix, iy) = grid.coords(idx as usize);
            ((ix + iy) % 2) as u8
        };
        order.sort_by_key(|&j| (parity(self.cells[j]), j));
        self.cells = order.iter().map(|&j| self.cells[j]).collect();
        self.nbrs = order.iter().map(|&j| self.nbrs[j]).collect();
    }
}

/// Minimizes the discrete functional over fields equal to g on the boundary.
///
/// Non-convergence within the sweep budget is reported in the `converged`
/// flag, not as an error; a negative datum is a validation error.
pub fn solve(
    grid: &Arc<Grid>,
    datum: &BoundaryDatum,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    solve_mode(grid, datum, opts, SolveMode::Single)
}

fn solve_mode(
    grid: &Arc<Grid>,
    datum: &BoundaryDatum,
    opts: &SolveOptions,
    mode: SolveMode,
) -> Result<(ScalarField, SolveReport)> {
    opts.validate()?;
    let lambda = opts.lambda;
    let mut field = match &opts.init {
        Initialization::Zero => ScalarField::from_datum(grid, datum, 0.0, lambda)?,
        Initialization::DatumSup => {
            let sup = datum.sup_on_boundary(grid)?;
            ScalarField::from_datum(grid, datum, sup, lambda)?
        }
        Initialization::Harmonic => {
            let f = harmonic_extension(grid, datum, opts.tolerance, opts.max_sweeps)?;
            ScalarField::from_values(grid, f.values().to_vec(), lambda)?
        }
        Initialization::Given(f) => {
            if **f.grid() != **grid {
                return Err(Error::GridMismatch(
                    "given initialization lives on a different grid".into(),
                ));
            }
            let mut vals = f.values().to_vec();
            for v in vals.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let mut init = ScalarField::from_values(grid, vals, lambda)?;
            // boundary equality with the datum always wins over the seed
            for &b in grid.boundary_cells() {
                let v = datum.eval(grid.center(b))?;
                init.values_mut()[b] = v;
            }
            init
        }
    };

    let mut plan = SweepPlan::new(grid);
    if opts.traversal == Traversal::RedBlack {
        plan.red_black(grid);
    }
    let h = grid.h;
    let vol = grid.cell_volume();
    let inv_h2 = 1.0 / (h * h);
    let kf = plan.k as f64;
    let inv_k = 1.0 / kf;
    // keep the mean iff k * mean^2 > lambda h^2, i.e. s^2 > k lambda h^2
    let keep_thr = kf * lambda * h * h;

    let mut residual = f64::INFINITY;
    let mut sweeps = 0usize;
    let mut stalled = 0u32;
    let mut converged = false;
    let mut trace = Vec::new();
    if opts.record_energy_trace {
        trace.push(total_energy(&field, lambda));
    }

    {
        let vals = field.values_mut();
        for _ in 0..opts.max_sweeps {
            let mut sweep_residual = 0.0f64;
            let mut decrease = 0.0f64;
            for (c, nb) in plan.cells.iter().zip(&plan.nbrs) {
                let i = *c as usize;
                let mut s = 0.0;
                for &n in nb.iter().take(plan.k) {
                    s += vals[n as usize];
                }
                let new = if s * s > keep_thr { s * inv_k } else { 0.0 };
                let old = vals[i];
                if new != old {
                    // local energy delta; the sumsq term cancels
                    let quad = (kf * (new * new - old * old) - 2.0 * s * (new - old)) * inv_h2;
                    let meas =
                        lambda * ((new > 0.0) as i32 - (old > 0.0) as i32) as f64;
                    decrease -= (quad + meas) * vol;
                    vals[i] = new;
                    let change = (new - old).abs();
                    if change > sweep_residual {
                        sweep_residual = change;
                    }
                }
            }
            sweeps += 1;
            residual = sweep_residual;
            if opts.record_energy_trace {
                let snapshot = ScalarField::from_values(grid, vals.to_vec(), lambda)?;
                trace.push(total_energy(&snapshot, lambda));
            }
            if residual <= opts.tolerance {
                converged = true;
                break;
            }
            if decrease < 1e-14 {
                stalled += 1;
                if stalled >= 10 {
                    break;
                }
            } else {
                stalled = 0;
            }
        }
    }

    let report = SolveReport {
        energy: total_energy(&field, lambda),
        sweeps,
        residual,
        positivity_measure: positivity_measure(&field, 0.0),
        converged,
        mode,
        energy_trace: trace,
    };
    Ok((field, report))
}

/// Lower and upper extreme solves: relaxation from zero and from the
/// datum-sup constant. The monotone update rule keeps them ordered.
pub fn solve_extremes(
    grid: &Arc<Grid>,
    datum: &BoundaryDatum,
    opts: &SolveOptions,
) -> Result<(ScalarField, ScalarField, (SolveReport, SolveReport))> {
    let lower_opts = opts.clone().with_init(Initialization::Zero);
    let upper_opts = opts.clone().with_init(Initialization::DatumSup);
    let (lower, rl) = solve_mode(grid, datum, &lower_opts, SolveMode::Lower)?;
    let (upper, ru) = solve_mode(grid, datum, &upper_opts, SolveMode::Upper)?;
    let (min_gap, at) = lower.min_gap_to(&upper)?;
    if min_gap < -1e-10 {
        return Err(Error::Internal(format!(
            "extreme solves are out of order by {min_gap} at cell {at}"
        )));
    }
    Ok((lower, upper, (rl, ru)))
}

/// Interior cells with positive value adjacent to a zero cell (within the
/// value tolerance).
pub fn free_boundary_cells(u: &ScalarField) -> Vec<usize> {
    let grid = u.grid();
    let mut out = Vec::new();
    for &i in grid.interior_cells() {
        if u.value(i) <= VALUE_TOL {
            continue;
        }
        if grid.stencil(i).any(|nb| u.value(nb) <= VALUE_TOL) {
            out.push(i);
        }
    }
    out
}

/// Order statistics of one-sided gradient magnitudes on the free boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientStats {
    pub count: usize,
    pub median: Option<f64>,
    pub interquartile_range: Option<f64>,
}

impl GradientStats {
    pub fn empty() -> Self {
        GradientStats {
            count: 0,
            median: None,
            interquartile_range: None,
        }
    }
}

/// One-sided difference gradient sampled at free-boundary cells toward the
/// positive side: per axis the larger-magnitude one-sided difference, then
/// the Euclidean norm across axes.
pub fn gradient_on_free_boundary(u: &ScalarField) -> GradientStats {
    let grid = u.grid();
    let h = grid.h;
    let cells = free_boundary_cells(u);
    if cells.is_empty() {
        return GradientStats::empty();
    }
    let nx = grid.n[0];
    let mut mags: Vec<f64> = cells
        .iter()
        .map(|&i| {
            let v = u.value(i);
            let dx = {
                let left = (v - u.value(i - 1)).abs();
                let right = (u.value(i + 1) - v).abs();
                left.max(right) / h
            };
            if grid.dimension() == 1 {
                dx
            } else {
                let down = (v - u.value(i - nx)).abs();
                let up = (u.value(i + nx) - v).abs();
                let dy = down.max(up) / h;
                (dx * dx + dy * dy).sqrt()
            }
        })
        .collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let pos = p * (mags.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let t = pos - lo as f64;
        mags[lo] * (1.0 - t) + mags[hi] * t
    };
    GradientStats {
        count: mags.len(),
        median: Some(q(0.5)),
        interquartile_range: Some(q(0.75) - q(0.25)),
    }
}
