//! Generic-uniqueness experiments: sweep a monotone family of boundary data,
//! solve both extremes per parameter, and look for the small set of
//! parameters where the extremes disagree while their energies tie.
//!
//! A large gap alone does not witness non-uniqueness: relaxation from the
//! datum-sup constant can stall on a locally stable configuration whose
//! energy is far from minimal, so the detection rule demands both a gap
//! above `gap_tol` and extreme energies within `energy_tol` of each other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::boundary::DatumFamily;
use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::solver::{solve_extremes, SolveOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    /// Max-norm distance between the upper and lower fields.
    pub gap: f64,
    pub energy_lower: f64,
    pub energy_upper: f64,
    pub converged_lower: bool,
    pub converged_upper: bool,
}

/// Sweep rows plus ordering diagnostics computed across consecutive rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Min over consecutive parameters and cells of lower_{t'} - lower_t.
    pub lower_order_min: f64,
    /// Same for the upper solves.
    pub upper_order_min: f64,
    /// Parameters whose minimal energy dropped below the predecessor's
    /// (recorded for investigation, not asserted).
    pub energy_decreases: Vec<f64>,
}

/// Runs extreme solves over a strictly increasing t-grid inside (0, 1).
/// Rows arrive in t order; non-converged solves are flagged in their row.
pub fn run_sweep(
    grid: &Arc<Grid>,
    family: &DatumFamily,
    t_grid: &[f64],
    opts: &SolveOptions,
) -> Result<SweepResult> {
    if t_grid.is_empty() {
        return Err(Error::Argument("sweep needs a nonempty t-grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("t-grid must be strictly increasing".into()));
    }
    if t_grid[0] <= 0.0 || *t_grid.last().unwrap() >= 1.0 {
        return Err(Error::Argument("t-grid must lie inside (0, 1)".into()));
    }
    family.validate()?;

    let solves: Vec<(SweepRow, Vec<f64>, Vec<f64>)> = t_grid
        .par_iter()
        .map(|&t| -> Result<(SweepRow, Vec<f64>, Vec<f64>)> {
            let datum = family.member(t)?;
            let (lower, upper, (rl, ru)) = solve_extremes(grid, &datum, opts)?;
            let gap = lower.max_norm_distance(&upper)?;
            let row = SweepRow {
                t,
                gap,
                energy_lower: rl.energy,
                energy_upper: ru.energy,
                converged_lower: rl.converged,
                converged_upper: ru.converged,
            };
            Ok((row, lower.values().to_vec(), upper.values().to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut lower_order_min = f64::INFINITY;
    let mut upper_order_min = f64::INFINITY;
    let mut energy_decreases = Vec::new();
    for w in solves.windows(2) {
        let (row0, lo0, up0) = &w[0];
        let (row1, lo1, up1) = &w[1];
        for i in 0..lo0.len() {
            if grid.label(i) != crate::geometry::CellLabel::Exterior {
                lower_order_min = lower_order_min.min(lo1[i] - lo0[i]);
                upper_order_min = upper_order_min.min(up1[i] - up0[i]);
            }
        }
        if row1.energy_lower < row0.energy_lower - 1e-10 {
            energy_decreases.push(row1.t);
        }
    }
    if !lower_order_min.is_finite() {
        lower_order_min = 0.0;
        upper_order_min = 0.0;
    }

    Ok(SweepResult {
        rows: solves.into_iter().map(|(row, _, _)| row).collect(),
        lower_order_min,
        upper_order_min,
        energy_decreases,
    })
}

/// Default gap tolerance: ties blur at grid scale.
pub fn default_gap_tol(h: f64) -> f64 {
    10.0 * h
}

/// Default energy tolerance relative to the solver's sweep tolerance.
pub fn default_energy_tol(solver_tol: f64) -> f64 {
    100.0 * solver_tol
}

/// Rows flagged as non-uniqueness witnesses: converged, gap above tolerance,
/// extreme energies within tolerance of each other.
pub fn nonuniqueness_flags(rows: &[SweepRow], gap_tol: f64, energy_tol: f64) -> Vec<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| {
            r.converged_lower
                && r.converged_upper
                && r.gap > gap_tol
                && (r.energy_upper - r.energy_lower).abs() <= energy_tol
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpSet {
    pub gap_tol: f64,
    /// Closed t-intervals of consecutive rows with gap above tolerance.
    pub intervals: Vec<(f64, f64)>,
    /// Each run is charged one t-step beyond its endpoint span.
    pub total_measure: f64,
}

/// Maximal runs of consecutive converged rows with gap > gap_tol. A run of a
/// single row still has positive measure (one t-step), so refining the grid
/// shrinks the measured width of a point jump.
pub fn jump_set(rows: &[SweepRow], gap_tol: f64) -> JumpSet {
    let steps: Vec<f64> = rows.windows(2).map(|w| w[1].t - w[0].t).collect();
    let step = median(&steps).unwrap_or(0.0);
    let mut intervals = Vec::new();
    let mut run_start: Option<f64> = None;
    let mut run_end = 0.0;
    for row in rows {
        let flagged = row.converged_lower && row.converged_upper && row.gap > gap_tol;
        if flagged {
            if run_start.is_none() {
                run_start = Some(row.t);
            }
            run_end = row.t;
        } else if let Some(start) = run_start.take() {
            intervals.push((start, run_end));
        }
    }
    if let Some(start) = run_start {
        intervals.push((start, run_end));
    }
    let total_measure = intervals
        .iter()
        .map(|(a, b)| (b - a) + step)
        .sum::<f64>()
        .max(0.0);
    JumpSet {
        gap_tol,
        intervals,
        total_measure,
    }
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(v[v.len() / 2])
}
