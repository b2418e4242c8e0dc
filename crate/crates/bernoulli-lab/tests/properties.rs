//! Property tests for the algebraic invariants that hold on arbitrary
//! inputs, not just the seeded cases of the unit tests.

use proptest::prelude::*;
use std::sync::Arc;

use bernoulli_lab::boundary::{BoundaryDatum, DatumFamily};
use bernoulli_lab::energy::{total_energy, ScalarField};
use bernoulli_lab::geometry::{CellLabel, DomainSpec, Grid};
use bernoulli_lab::oracle1d;
use bernoulli_lab::regularity::check_cut_paste;

fn small_square_grid() -> Arc<Grid> {
    Arc::new(Grid::build(&DomainSpec::unit_square(), 0.2).unwrap())
}

fn field_from(grid: &Arc<Grid>, interior: &[f64], boundary: &[f64]) -> ScalarField {
    let mut vals = vec![0.0; grid.num_cells()];
    for (k, &i) in grid.interior_cells().iter().enumerate() {
        vals[i] = interior[k % interior.len()].abs();
    }
    for (k, &b) in grid.boundary_cells().iter().enumerate() {
        vals[b] = boundary[k % boundary.len()].abs();
    }
    ScalarField::from_values(grid, vals, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cut_paste_slack_nonnegative(
        iu in prop::collection::vec(0.0f64..1.0, 16),
        iv in prop::collection::vec(0.0f64..1.0, 16),
        bv in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        let grid = small_square_grid();
        let u = field_from(&grid, &iu, &bv);
        let v = field_from(&grid, &iv, &bv);
        let rep = check_cut_paste(&u, &v, 1.0).unwrap();
        prop_assert!(rep.pass, "slack violation {}", rep.violation);
    }

    #[test]
    fn max_min_energy_identity_of_measures(
        iu in prop::collection::vec(0.0f64..1.0, 16),
        iv in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        // |{max > 0}| + |{min > 0}| = |{u > 0}| + |{v > 0}| exactly
        let grid = small_square_grid();
        let bv = vec![0.25];
        let u = field_from(&grid, &iu, &bv);
        let v = field_from(&grid, &iv, &bv);
        let (hi, lo) = u.max_min(&v).unwrap();
        let m = |f: &ScalarField| bernoulli_lab::energy::positivity_measure(f, 0.0);
        prop_assert_eq!(m(&hi) + m(&lo), m(&u) + m(&v));
    }

    #[test]
    fn oracle_minimizer_beats_random_piecewise_fields(
        a in 0.0f64..0.6,
        b in 0.0f64..0.6,
        knots in prop::collection::vec(0.0f64..0.6, 7),
    ) {
        // any admissible competitor's sampled energy is at least the oracle
        // optimum minus the O(h) measure-count slack
        let n = 256;
        let h = 1.0 / n as f64;
        let grid = Arc::new(Grid::build(&DomainSpec::interval(0.0, 1.0), h).unwrap());
        let best = &oracle1d::solve_1d_exact(1.0, a, b, 1.0).unwrap()[0];

        let mut vals = vec![0.0; grid.num_cells()];
        for i in 0..grid.num_cells() {
            if grid.label(i) == CellLabel::Exterior {
                continue;
            }
            let x = grid.center(i)[0];
            let k = ((x * (knots.len() - 1) as f64).floor() as usize).min(knots.len() - 2);
            let t = x * (knots.len() - 1) as f64 - k as f64;
            vals[i] = knots[k] * (1.0 - t) + knots[k + 1] * t;
        }
        // competitor must satisfy the boundary condition
        for &bc in grid.boundary_cells() {
            let x = grid.center(bc)[0];
            vals[bc] = if x < 0.5 { a } else { b };
        }
        // interior cells adjacent to the boundary keep the competitor
        // admissible but otherwise arbitrary
        let competitor = ScalarField::from_values(&grid, vals, 1.0).unwrap();
        let e = total_energy(&competitor, 1.0);
        // the cell count can miss up to 2h of measure per positivity
        // component, and the competitor has at most one component per knot
        let slack = 2.0 * h * knots.len() as f64;
        prop_assert!(
            e >= best.energy - slack,
            "competitor energy {e} beat the oracle {}",
            best.energy
        );
    }

    #[test]
    fn family_members_stay_ordered(
        base_value in 0.0f64..0.5,
        s in 0.01f64..0.98,
        dt in 0.01f64..0.5,
    ) {
        let t = (s + dt).min(0.99);
        let grid = Arc::new(Grid::build(&DomainSpec::interval(0.0, 1.0), 0.1).unwrap());
        for fam in [
            DatumFamily::additive(BoundaryDatum::constant(base_value), 2.0),
            DatumFamily::scaling(BoundaryDatum::constant(base_value), 2.0),
            DatumFamily::vertical(BoundaryDatum::constant(base_value), 1.5, 3.0),
        ] {
            let lo = fam.member(s).unwrap().boundary_values(&grid).unwrap();
            let hi = fam.member(t).unwrap().boundary_values(&grid).unwrap();
            for (l, h) in lo.iter().zip(&hi) {
                prop_assert!(h >= l, "family member ordering broke: {h} < {l}");
            }
        }
    }

    #[test]
    fn distance_field_is_lipschitz(cx in -0.3f64..0.3, cy in -0.3f64..0.3, r in 0.5f64..1.0) {
        let grid = Grid::build(&DomainSpec::disk([cx, cy], r), 0.1).unwrap();
        let dist = grid.distance_field();
        let bound = grid.h * 2.0f64.sqrt() + 1e-12;
        for &i in grid.interior_cells() {
            for nb in grid.stencil(i) {
                prop_assert!((dist[i] - dist[nb]).abs() <= bound);
            }
        }
    }

    #[test]
    fn oracle_scaling_covariance(a in 0.0f64..0.6, b in 0.0f64..0.6, s in 1.1f64..3.0) {
        let base = oracle1d::solve_1d_exact(1.0, a, b, 1.0).unwrap();
        let scaled = oracle1d::solve_1d_exact(s, s * a, s * b, 1.0).unwrap();
        prop_assert_eq!(base.len(), scaled.len());
        for (m0, m1) in base.iter().zip(&scaled) {
            prop_assert!((m1.energy - s * m0.energy).abs() <= 1e-9 * (1.0 + m1.energy));
        }
    }
}
