//! Refutable numerical checks derived from the structure theory: comparison
//! of ordered solves, cut-and-paste submodularity, barrier positivity near
//! heavily loaded boundary patches, equicontinuity envelopes across families,
//! and boundary Hölder quotients.
//!
//! Every check returns a [`CheckReport`] whose `pass` flag is equivalent to
//! `violation <= tolerance`, with the worst-case location attached when one
//! exists.

use serde::{Deserialize, Serialize};

use crate::boundary::{field_modulus, ModulusCurve};
use crate::energy::{total_energy, ScalarField, VALUE_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Cell { ix: usize, iy: usize },
    Pair { a: [usize; 2], b: [usize; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// Worst-case violation; pass iff violation <= tolerance.
    pub violation: f64,
    pub tolerance: f64,
    pub location: Option<Location>,
    pub params: serde_json::Value,
}

impl CheckReport {
    fn new(
        name: &str,
        violation: f64,
        tolerance: f64,
        location: Option<Location>,
        params: serde_json::Value,
    ) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            pass: violation <= tolerance,
            violation,
            tolerance,
            location,
            params,
        }
    }
}

/// Comparison check: u_high must dominate u_low cell by cell. The caller
/// guarantees the generating data are ordered with strictness on each
/// positivity component (additive families provide that).
pub fn check_comparison(
    u_low: &ScalarField,
    u_high: &ScalarField,
    tol: f64,
) -> Result<CheckReport> {
    if !u_low.same_grid(u_high) {
        return Err(Error::GridMismatch(
            "comparison check needs fields on one grid".into(),
        ));
    }
    let (min_gap, at) = u_low.min_gap_to(u_high)?;
    let (ix, iy) = u_low.grid().coords(at);
    Ok(CheckReport::new(
        "comparison",
        -min_gap,
        tol,
        Some(Location::Cell { ix, iy }),
        serde_json::json!({ "min_gap": min_gap }),
    ))
}

/// Discrete cut-and-paste submodularity: for fields with identical boundary
/// values, E(u) + E(v) - E(max) - E(min) >= -1e-12. The per-edge inequality
/// (a v b - c v d)^2 + (a ^ b - c ^ d)^2 <= (a - c)^2 + (b - d)^2 makes the
/// slack nonnegative up to rounding; the measure terms cancel exactly.
pub fn check_cut_paste(u: &ScalarField, v: &ScalarField, lambda: f64) -> Result<CheckReport> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch(
            "cut-and-paste check needs fields on one grid".into(),
        ));
    }
    let bdry = u.boundary_distance(v);
    if bdry > 1e-12 {
        return Err(Error::Argument(format!(
            "cut-and-paste needs identical boundary values, max difference {bdry}"
        )));
    }
    let (hi, lo) = u.max_min(v)?;
    let e_u = total_energy(u, lambda);
    let e_v = total_energy(v, lambda);
    let e_hi = total_energy(&hi, lambda);
    let e_lo = total_energy(&lo, lambda);
    let slack = e_u + e_v - e_hi - e_lo;
    Ok(CheckReport::new(
        "cut-paste",
        -slack,
        1e-12,
        None,
        serde_json::json!({
            "energy_u": e_u,
            "energy_v": e_v,
            "energy_max": e_hi,
            "energy_min": e_lo,
            "slack": slack,
        }),
    ))
}

/// Barrier positivity: every interior cell within distance rho of the patch
/// must be strictly positive (above the value tolerance). The violation is
/// how deep inside the claimed-positive region the worst zero sits.
pub fn check_barrier_positivity(
    u: &ScalarField,
    patch: &[usize],
    level: f64,
    rho: f64,
) -> Result<CheckReport> {
    let grid = u.grid();
    if patch.is_empty() {
        return Err(Error::Argument("barrier check needs a nonempty patch".into()));
    }
    for &b in patch {
        if !grid.boundary_cells().contains(&b) {
            return Err(Error::Argument(format!("patch cell {b} is not boundary")));
        }
        if u.value(b) < level - 1e-12 {
            return Err(Error::Argument(format!(
                "patch cell {b} carries {} below the level {level}",
                u.value(b)
            )));
        }
    }
    let centers: Vec<[f64; 2]> = patch.iter().map(|&b| grid.center(b)).collect();
    // an offending cell at center distance exactly rho still covers half a
    // cell width inside the ball, so its depth is rho - dist + h/2 > 0
    let half_cell = grid.h / 2.0;
    let mut violation = 0.0f64;
    let mut worst = None;
    for &i in grid.interior_cells() {
        let p = grid.center(i);
        let dist = centers
            .iter()
            .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        if dist <= rho && u.value(i) <= VALUE_TOL {
            let depth = rho - dist + half_cell;
            if depth > violation {
                violation = depth;
                worst = Some(i);
            }
        }
    }
    let location = worst.map(|i| {
        let (ix, iy) = grid.coords(i);
        Location::Cell { ix, iy }
    });
    Ok(CheckReport::new(
        "barrier-positivity",
        violation,
        0.0,
        location,
        serde_json::json!({ "rho": rho, "level": level, "patch_cells": patch.len() }),
    ))
}

/// Largest rho on the dyadic ladder rho_max / 2^k that passes the barrier
/// check; 0.0 when even the smallest rung fails. Passing is monotone in rho
/// (larger rho claims more cells positive), so the scan walks down from the
/// top.
pub fn barrier_scan(
    u: &ScalarField,
    patch: &[usize],
    level: f64,
    rho_max: f64,
) -> Result<f64> {
    let h = u.grid().h;
    let mut rho = rho_max;
    while rho >= h {
        if check_barrier_positivity(u, patch, level, rho)?.pass {
            return Ok(rho);
        }
        rho /= 2.0;
    }
    Ok(0.0)
}

/// Per-field modulus curves over the closed domain plus their pointwise max.
pub fn equicontinuity_report(
    fields: &[ScalarField],
    deltas: &[f64],
) -> Result<(Vec<ModulusCurve>, ModulusCurve)> {
    if fields.is_empty() {
        return Err(Error::Argument("equicontinuity needs at least one field".into()));
    }
    for f in fields.iter().skip(1) {
        if !fields[0].same_grid(f) {
            return Err(Error::GridMismatch(
                "equicontinuity fields must share a grid".into(),
            ));
        }
    }
    let region = fields[0].closed_region();
    let curves = fields
        .iter()
        .map(|f| field_modulus(f, &region, deltas))
        .collect::<Result<Vec<_>>>()?;
    let envelope = ModulusCurve::envelope(&curves);
    Ok((curves, envelope))
}

/// Hölder quotient restricted to pairs with at least one cell within `band`
/// of the boundary; pair separation is the grid spacing.
pub fn boundary_holder_quotient(u: &ScalarField, gamma: f64, band: f64) -> Result<f64> {
    let grid = u.grid();
    let h = grid.h;
    if band < 2.0 * h {
        return Err(Error::Argument(format!(
            "band = {band} too small, need at least 2h = {}",
            2.0 * h
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Argument(format!("gamma = {gamma} not in (0, 1]")));
    }
    let dist = grid.distance_field();
    let region = u.closed_region();
    let band_cells: Vec<usize> = region
        .iter()
        .copied()
        .filter(|&i| dist[i] <= band)
        .collect();
    if band_cells.is_empty() {
        return Err(Error::Argument("no cells inside the boundary band".into()));
    }
    let min_sep = h * (1.0 - 1e-12);
    let mut sup = 0.0f64;
    for &i in &band_cells {
        let pi = grid.center(i);
        let vi = u.value(i);
        for &j in &region {
            if j == i {
                continue;
            }
            let pj = grid.center(j);
            let dx = pi[0] - pj[0];
            let dy = pi[1] - pj[1];
            let d = (dx * dx + dy * dy).sqrt();
            if d < min_sep {
                continue;
            }
            let q = (vi - u.value(j)).abs() / d.powf(gamma);
            if q > sup {
                sup = q;
            }
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{field_holder_seminorm, BoundaryDatum};
    use crate::geometry::{DomainSpec, Grid};
    use crate::oracle1d;
    use crate::radial;
    use crate::solver::{solve, SolveOptions};
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn grid_1d(n: usize) -> Arc<Grid> {
        Arc::new(Grid::build(&DomainSpec::interval(0.0, 1.0), 1.0 / n as f64).unwrap())
    }

    #[test]
    fn comparison_equal_fields_pass() {
        let grid = grid_1d(50);
        let f = oracle1d::solve_1d_exact(1.0, 0.1, 0.0, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let rep = check_comparison(&f, &f, 1e-10).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.violation, 0.0);
    }

    #[test]
    fn comparison_of_nested_triangles() {
        let grid = grid_1d(100);
        let lo = oracle1d::solve_1d_exact(1.0, 0.1, 0.1, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let hi = oracle1d::solve_1d_exact(1.0, 0.2, 0.2, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let rep = check_comparison(&lo, &hi, 1e-10).unwrap();
        assert!(rep.pass, "violation {}", rep.violation);
        // swapping the arguments must fail with a positive violation
        let rep = check_comparison(&hi, &lo, 1e-10).unwrap();
        assert!(!rep.pass);
        assert!(rep.violation > 0.05);
    }

    #[test]
    fn cut_paste_identical_fields_zero_slack() {
        let grid = grid_1d(20);
        let f = oracle1d::solve_1d_exact(1.0, 0.3, 0.3, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let rep = check_cut_paste(&f, &f, 1.0).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.params["slack"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn cut_paste_hand_example() {
        // interval [0, 3] at h = 1: interior values u = (0, 2), v = (1, 1)
        // with zero boundary; E(u)+E(v) = 13, E(max)+E(min) = 11, slack 2
        let grid = Arc::new(Grid::build(&DomainSpec::interval(0.0, 3.0), 1.0).unwrap());
        let mk = |a: f64, b: f64| {
            let mut vals = vec![0.0; grid.num_cells()];
            let ints = grid.interior_cells();
            vals[ints[0]] = a;
            vals[ints[1]] = b;
            ScalarField::from_values(&grid, vals, 1.0).unwrap()
        };
        let u = mk(0.0, 2.0);
        let v = mk(1.0, 1.0);
        let rep = check_cut_paste(&u, &v, 1.0).unwrap();
        assert!(rep.pass);
        let slack = rep.params["slack"].as_f64().unwrap();
        assert!((slack - 2.0).abs() < 1e-12, "slack {slack}");
    }

    #[test]
    fn cut_paste_random_pairs() {
        let grid = Arc::new(Grid::build(&DomainSpec::unit_square(), 0.125).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut mk = |boundary: &Vec<f64>| {
                let mut vals = vec![0.0; grid.num_cells()];
                for &i in grid.interior_cells() {
                    // mix of zeros and positive values
                    vals[i] = if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    };
                }
                for (k, &b) in grid.boundary_cells().iter().enumerate() {
                    vals[b] = boundary[k];
                }
                ScalarField::from_values(&grid, vals, 1.0).unwrap()
            };
            let boundary: Vec<f64> = (0..grid.boundary_cells().len())
                .map(|k| (k as f64 * 0.37).sin().abs())
                .collect();
            let u = mk(&boundary);
            let v = mk(&boundary);
            let rep = check_cut_paste(&u, &v, 1.0).unwrap();
            assert!(rep.pass, "slack violation {}", rep.violation);
        }
    }

    #[test]
    fn cut_paste_rejects_boundary_mismatch() {
        let grid = grid_1d(10);
        let u = ScalarField::from_datum(&grid, &BoundaryDatum::constant(0.1), 0.0, 1.0).unwrap();
        let v = ScalarField::from_datum(&grid, &BoundaryDatum::constant(0.2), 0.0, 1.0).unwrap();
        assert!(check_cut_paste(&u, &v, 1.0).is_err());
    }

    #[test]
    fn barrier_zero_field_fails() {
        let grid = grid_1d(50);
        let u = ScalarField::from_datum(&grid, &BoundaryDatum::constant(0.0), 0.0, 1.0).unwrap();
        let patch = vec![grid.boundary_cells()[0]];
        let rep = check_barrier_positivity(&u, &patch, 0.0, 0.2).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn barrier_detached_triangle() {
        let n = 100;
        let grid = grid_1d(n);
        let field = oracle1d::solve_1d_exact(1.0, 0.1, 0.0, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let left = grid
            .boundary_cells()
            .iter()
            .copied()
            .find(|&b| grid.center(b)[0].abs() < 1e-12)
            .unwrap();
        let patch = vec![left];
        let pass = check_barrier_positivity(&field, &patch, 0.1, 0.05).unwrap();
        assert!(pass.pass, "rho inside the support must pass");
        let fail = check_barrier_positivity(&field, &patch, 0.1, 0.15).unwrap();
        assert!(!fail.pass, "rho past the support must fail");
        let best = barrier_scan(&field, &patch, 0.1, 0.8).unwrap();
        assert!(best > 0.0 && best < 0.1, "largest passing rho {best}");
    }

    #[test]
    fn barrier_annulus_inner_patch() {
        // v1 sampled on the annulus is strictly positive inside radius R
        let radius = radial::critical_radius(2, 1.0).unwrap();
        let spec = DomainSpec::annulus([0.0, 0.0], 1.0, radius);
        let grid = Arc::new(Grid::build(&spec, 1.0 / 32.0).unwrap());
        let mut vals = vec![0.0; grid.num_cells()];
        for i in 0..grid.num_cells() {
            if grid.label(i) != crate::geometry::CellLabel::Exterior {
                let c = grid.center(i);
                let r = (c[0] * c[0] + c[1] * c[1]).sqrt().clamp(1.0, radius);
                vals[i] = radial::annulus_solution_with_radius(2, r, radius).unwrap();
            }
        }
        let u = ScalarField::from_values(&grid, vals, 1.0).unwrap();
        let patch: Vec<usize> = grid
            .boundary_cells()
            .iter()
            .copied()
            .filter(|&b| {
                let c = grid.center(b);
                (c[0] * c[0] + c[1] * c[1]).sqrt() < 1.0 + 2.0 * grid.h
            })
            .collect();
        let level = patch.iter().map(|&b| u.value(b)).fold(f64::INFINITY, f64::min);
        let rho = (radius - 1.0) / 2.0;
        let rep = check_barrier_positivity(&u, &patch, level, rho).unwrap();
        assert!(rep.pass, "violation {}", rep.violation);
    }

    #[test]
    fn equicontinuity_identical_fields() {
        let grid = grid_1d(40);
        let f = oracle1d::solve_1d_exact(1.0, 0.3, 0.3, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let deltas = [0.05, 0.1, 0.2, 0.4];
        let (curves, envelope) =
            equicontinuity_report(&[f.clone(), f.clone()], &deltas).unwrap();
        assert_eq!(curves[0], curves[1]);
        assert_eq!(envelope, curves[0]);
        assert!(envelope.check_invariants());
        assert!(equicontinuity_report(&[], &deltas).is_err());
    }

    #[test]
    fn equicontinuity_envelope_decays_for_scaling_family() {
        let spec = DomainSpec::disk([0.0, 0.0], 1.0);
        let grid = Arc::new(Grid::build(&spec, 1.0 / 16.0).unwrap());
        let opts = SolveOptions::default();
        let base = BoundaryDatum::linear([0.5, 0.0], 0.5);
        let fam = crate::boundary::DatumFamily::scaling(base, 1.0);
        let fields: Vec<ScalarField> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&t| solve(&grid, &fam.member(t).unwrap(), &opts).unwrap().0)
            .collect();
        let deltas = [0.125, 0.25, 0.5, 1.0];
        let (_, envelope) = equicontinuity_report(&fields, &deltas).unwrap();
        assert!(envelope.check_invariants());
        assert!(envelope.omega_at_smallest() <= 0.5 * envelope.omega_at_largest() + 1e-12);
    }

    #[test]
    fn holder_quotient_constant_zero_and_band_limits() {
        let grid = Arc::new(Grid::build(&DomainSpec::unit_square(), 0.125).unwrap());
        let u = ScalarField::from_datum(&grid, &BoundaryDatum::constant(0.4), 0.4, 1.0).unwrap();
        let q = boundary_holder_quotient(&u, 0.75, 0.5).unwrap();
        assert_eq!(q, 0.0);
        assert!(boundary_holder_quotient(&u, 0.75, 0.1).is_err());
    }

    #[test]
    fn holder_quotient_bounded_by_global_seminorm() {
        let grid = grid_1d(32);
        let f = oracle1d::solve_1d_exact(1.0, 0.4, 0.1, 1.0).unwrap()[0]
            .sample(&grid)
            .unwrap();
        let q = boundary_holder_quotient(&f, 0.75, 0.25).unwrap();
        let region = f.closed_region();
        let full = field_holder_seminorm(&f, 0.75, &region, grid.h).unwrap();
        assert!(q <= full + 1e-12, "band {q} vs full {full}");
    }

    #[test]
    fn equicontinuity_envelope_grows_under_refinement() {
        // finer grids resolve more pairs, so the coarse envelope cannot
        // exceed the fine one by more than the stated slack
        let spec = DomainSpec::unit_square();
        let datum = BoundaryDatum::constant(0.4);
        let deltas = [0.125, 0.25, 0.5];
        let mut envelopes = Vec::new();
        for h in [1.0 / 8.0, 1.0 / 16.0] {
            let grid = Arc::new(Grid::build(&spec, h).unwrap());
            let (f, _) = solve(&grid, &datum, &SolveOptions::default()).unwrap();
            let (_, env) = equicontinuity_report(&[f], &deltas).unwrap();
            envelopes.push(env);
        }
        for (c, f) in envelopes[0].entries.iter().zip(&envelopes[1].entries) {
            assert!(
                c.1 <= f.1 + 1e-3,
                "coarse {} above fine {} at delta {}",
                c.1,
                f.1,
                c.0
            );
        }
    }
}
