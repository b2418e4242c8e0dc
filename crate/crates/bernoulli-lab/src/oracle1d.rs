//! Exact 1D minimizers by candidate enumeration.
//!
//! On an interval of length L with endpoint data a, b >= 0 the positivity set
//! of a minimizer is a union of at most two intervals, each touching an
//! endpoint, and the minimizer is affine on each positive component. Interior
//! free boundary points force slope magnitude sqrt(lambda) when the
//! detachment length is unconstrained. That leaves five structures:
//!
//! * identically zero (only admissible when a = b = 0);
//! * the affine interpolation spanning the interval;
//! * a left- or right-attached triangle detaching inside;
//! * two detached triangles, one per endpoint.
//!
//! Optimizing each structure in closed form and comparing energies yields
//! every global minimizer exactly. Detachment lengths come from minimizing
//! value^2 / l + lambda * l at l = value / sqrt(lambda); a clamped
//! one-sided detachment coincides with the affine candidate, and a clamped
//! double detachment (a V touching zero inside) is dominated by the affine
//! candidate since a^2/x + b^2/(L-x) >= (a+b)^2 / L > (a-b)^2 / L.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::DatumFamily;
use crate::energy::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::Grid;

/// Relative tolerance for declaring two candidate energies tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    LinearThrough,
    LeftDetached,
    RightDetached,
    DoubleDetached,
    IdenticallyZero,
}

/// A piecewise-linear 1D minimizer descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear1D {
    pub structure: Structure,
    /// Interior breakpoints (detachment points), increasing.
    pub breakpoints: Vec<f64>,
    pub length: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub energy: f64,
    /// Slope magnitude at free boundary points; exactly sqrt(lambda) for
    /// unconstrained detachments, empty otherwise.
    pub free_slopes: Vec<f64>,
}

impl PiecewiseLinear1D {
    /// Evaluates the descriptor at a position in [0, L].
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.length;
        match self.structure {
            Structure::IdenticallyZero => 0.0,
            Structure::LinearThrough => self.a + (self.b - self.a) * x / l,
            Structure::LeftDetached => {
                let cut = self.breakpoints[0];
                if x < cut {
                    self.a * (1.0 - x / cut)
                } else {
                    0.0
                }
            }
            Structure::RightDetached => {
                let cut = self.breakpoints[0];
                if x > cut {
                    self.b * (x - cut) / (l - cut)
                } else {
                    0.0
                }
            }
            Structure::DoubleDetached => {
                let (c0, c1) = (self.breakpoints[0], self.breakpoints[1]);
                if x < c0 {
                    self.a * (1.0 - x / c0)
                } else if x > c1 {
                    self.b * (x - c1) / (l - c1)
                } else {
                    0.0
                }
            }
        }
    }

    /// Total length of the positivity set.
    pub fn positive_length(&self) -> f64 {
        match self.structure {
            Structure::IdenticallyZero => 0.0,
            Structure::LinearThrough => self.length,
            Structure::LeftDetached => self.breakpoints[0],
            Structure::RightDetached => self.length - self.breakpoints[0],
            Structure::DoubleDetached => {
                self.breakpoints[0] + (self.length - self.breakpoints[1])
            }
        }
    }

    /// Samples the descriptor onto a 1D grid over [0, L].
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<ScalarField> {
        if grid.dimension() != 1 {
            return Err(Error::Argument("sampling needs a 1D grid".into()));
        }
        let mut values = vec![0.0; grid.num_cells()];
        for i in 0..grid.num_cells() {
            let x = grid.center(i)[0];
            if (0.0..=self.length).contains(&x) {
                values[i] = self.eval(x).max(0.0);
            }
        }
        ScalarField::from_values(grid, values, self.lambda)
    }
}

fn candidate(
    structure: Structure,
    breakpoints: Vec<f64>,
    length: f64,
    a: f64,
    b: f64,
    lambda: f64,
    energy: f64,
    free_slopes: Vec<f64>,
) -> PiecewiseLinear1D {
    PiecewiseLinear1D {
        structure,
        breakpoints,
        length,
        a,
        b,
        lambda,
        energy,
        free_slopes,
    }
}

/// Enumerates all global minimizers for endpoint data (a, b) on [0, L],
/// up to energy ties within [`TIE_TOL`] relative tolerance.
pub fn solve_1d_exact(length: f64, a: f64, b: f64, lambda: f64) -> Result<Vec<PiecewiseLinear1D>> {
    if !(length > 0.0) {
        return Err(Error::Validation(format!("length must be positive, got {length}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!("lambda must be positive, got {lambda}")));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::Validation(format!(
            "endpoint data must be nonnegative, got a = {a}, b = {b}"
        )));
    }
    let s = lambda.sqrt();
    let mut cands: Vec<PiecewiseLinear1D> = Vec::new();

    if a == 0.0 && b == 0.0 {
        cands.push(candidate(
            Structure::IdenticallyZero,
            vec![],
            length,
            a,
            b,
            lambda,
            0.0,
            vec![],
        ));
    } else {
        // affine span: positive on the whole interval (up to an endpoint zero)
        let slope = (b - a) / length;
        let e = slope * slope * length + lambda * length;
        cands.push(candidate(
            Structure::LinearThrough,
            vec![],
            length,
            a,
            b,
            lambda,
            e,
            vec![],
        ));
    }

    if a > 0.0 && b == 0.0 {
        let l = a / s;
        if l < length {
            cands.push(candidate(
                Structure::LeftDetached,
                vec![l],
                length,
                a,
                b,
                lambda,
                2.0 * a * s,
                vec![s],
            ));
        }
    }
    if a == 0.0 && b > 0.0 {
        let l = b / s;
        if l < length {
            cands.push(candidate(
                Structure::RightDetached,
                vec![length - l],
                length,
                a,
                b,
                lambda,
                2.0 * b * s,
                vec![s],
            ));
        }
    }
    if a > 0.0 && b > 0.0 {
        let la = a / s;
        let lb = b / s;
        if la + lb <= length {
            cands.push(candidate(
                Structure::DoubleDetached,
                vec![la, length - lb],
                length,
                a,
                b,
                lambda,
                2.0 * s * (a + b),
                vec![s, s],
            ));
        }
    }

    let best = cands
        .iter()
        .map(|c| c.energy)
        .fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best.abs().max(1.0);
    let mut winners: Vec<PiecewiseLinear1D> = cands
        .into_iter()
        .filter(|c| c.energy <= best + tol)
        .collect();
    winners.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap());
    Ok(winners)
}

/// The datum level at which the constant and double-detached candidates tie
/// for symmetric data a = b on [0, L]: a* = sqrt(lambda) L / 4 (from
/// lambda L = 4 a sqrt(lambda); the double detachment stays feasible since
/// 2 l* = L/2).
pub fn tie_locus_symmetric(length: f64, lambda: f64) -> f64 {
    lambda.sqrt() * length / 4.0
}

/// One row of an exact symmetric sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sweep1dRow {
    pub t: f64,
    pub count: usize,
    /// Difference between the max and min minimizer at the midpoint.
    pub gap_mid: f64,
    pub energy: f64,
}

/// Sweeps a family of symmetric endpoint data over a t-grid and reports the
/// exact minimizer multiplicity and the midpoint gap per parameter.
///
/// The family must produce equal endpoint values g_t(0) = g_t(L); the plain
/// additive family over a zero base gives g_t = t.
pub fn sweep_1d(
    family: &DatumFamily,
    length: f64,
    lambda: f64,
    t_grid: &[f64],
) -> Result<Vec<Sweep1dRow>> {
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let member = family.member(t)?;
        let a = member.eval([0.0, 0.0])?;
        let b = member.eval([length, 0.0])?;
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::Argument(format!(
                "sweep_1d needs symmetric data, got g({t})(0) = {a}, g({t})(L) = {b}"
            )));
        }
        let minimizers = solve_1d_exact(length, a, b, lambda)?;
        let mid = length / 2.0;
        let vals: Vec<f64> = minimizers.iter().map(|m| m.eval(mid)).collect();
        let gap_mid = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(Sweep1dRow {
            t,
            count: minimizers.len(),
            gap_mid,
            energy: minimizers[0].energy,
        });
    }
    Ok(rows)
}

/// Jump width measured from an exact sweep: one t-step per multi-minimizer
/// row.
pub fn sweep_1d_jump_width(rows: &[Sweep1dRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let step = rows[1].t - rows[0].t;
    step * rows.iter().filter(|r| r.count >= 2).count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryDatum;
    use crate::energy::total_energy;
    use crate::geometry::DomainSpec;

    #[test]
    fn symmetric_tie_has_two_minimizers_energy_one() {
        let ms = solve_1d_exact(1.0, 0.25, 0.25, 1.0).unwrap();
        assert_eq!(ms.len(), 2);
        for m in &ms {
            assert!((m.energy - 1.0).abs() <= 1e-12, "energy {}", m.energy);
        }
        let tags: Vec<Structure> = ms.iter().map(|m| m.structure).collect();
        assert!(tags.contains(&Structure::LinearThrough));
        assert!(tags.contains(&Structure::DoubleDetached));
        // per-side detachment length 0.25
        let dd = ms
            .iter()
            .find(|m| m.structure == Structure::DoubleDetached)
            .unwrap();
        assert!((dd.breakpoints[0] - 0.25).abs() < 1e-15);
        assert!((dd.breakpoints[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn one_sided_detachment_wins_for_small_data() {
        let ms = solve_1d_exact(1.0, 0.1, 0.0, 1.0).unwrap();
        assert_eq!(ms.len(), 1);
        let m = &ms[0];
        assert_eq!(m.structure, Structure::LeftDetached);
        assert!((m.breakpoints[0] - 0.1).abs() < 1e-15);
        assert!((m.energy - 0.2).abs() < 1e-15);
        // the affine competitor would cost 0.01 + 1
        assert!(m.energy < 1.01);
    }

    #[test]
    fn zero_data_zero_minimizer() {
        let ms = solve_1d_exact(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].structure, Structure::IdenticallyZero);
        assert_eq!(ms[0].energy, 0.0);
    }

    #[test]
    fn detached_slopes_are_exactly_sqrt_lambda() {
        for lambda in [1.0, 2.0, 4.0, 0.3] {
            let s = f64::sqrt(lambda);
            let ms = solve_1d_exact(1.0, 0.1, 0.0, lambda).unwrap();
            for m in &ms {
                for slope in &m.free_slopes {
                    assert_eq!(*slope, s);
                }
            }
        }
    }

    #[test]
    fn tie_locus_values() {
        assert!((tie_locus_symmetric(1.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((tie_locus_symmetric(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((tie_locus_symmetric(1.0, 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn around_the_tie_the_winner_flips() {
        let below = solve_1d_exact(1.0, 0.24, 0.24, 1.0).unwrap();
        assert_eq!(below.len(), 1);
        assert_eq!(below[0].structure, Structure::DoubleDetached);
        assert!((below[0].energy - 0.96).abs() < 1e-12);

        let above = solve_1d_exact(1.0, 0.26, 0.26, 1.0).unwrap();
        assert_eq!(above.len(), 1);
        assert_eq!(above[0].structure, Structure::LinearThrough);
        assert!((above[0].energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_counts_two_only_at_tie() {
        let fam = DatumFamily::additive(BoundaryDatum::constant(0.0), 1.0);
        let t_grid: Vec<f64> = (2..=18).map(|k| k as f64 * 0.05).collect();
        let rows = sweep_1d(&fam, 1.0, 1.0, &t_grid).unwrap();
        for row in &rows {
            if (row.t - 0.25).abs() < 1e-9 {
                assert_eq!(row.count, 2, "t = {}", row.t);
                assert!((row.gap_mid - 0.25).abs() < 1e-12);
            } else {
                assert_eq!(row.count, 1, "t = {}", row.t);
                assert_eq!(row.gap_mid, 0.0);
            }
        }
    }

    #[test]
    fn sweep_jump_width_halves_under_refinement() {
        let fam = DatumFamily::additive(BoundaryDatum::constant(0.0), 1.0);
        let coarse: Vec<f64> = (1..=89).map(|k| 0.1 + (k - 1) as f64 * 0.01).collect();
        let fine: Vec<f64> = (1..=177).map(|k| 0.1 + (k - 1) as f64 * 0.005).collect();
        let w_coarse = sweep_1d_jump_width(&sweep_1d(&fam, 1.0, 1.0, &coarse).unwrap());
        let w_fine = sweep_1d_jump_width(&sweep_1d(&fam, 1.0, 1.0, &fine).unwrap());
        assert!(w_coarse > 0.0);
        assert!((w_fine - w_coarse / 2.0).abs() <= 0.005 + 1e-12);
    }

    #[test]
    fn sampled_energy_matches_closed_form() {
        // Dirichlet terms are exact for node-aligned breakpoints; the
        // measure term carries the O(h) cell-count error, so the bound is
        // a few h rather than the naive quadrature order.
        let n = 1024;
        let h = 1.0 / n as f64;
        let grid = Arc::new(Grid::build(&DomainSpec::interval(0.0, 1.0), h).unwrap());
        for (a, b) in [(0.25, 0.25), (0.1, 0.0), (0.0, 0.0), (0.5, 0.25), (0.125, 0.5)] {
            for m in solve_1d_exact(1.0, a, b, 1.0).unwrap() {
                let field = m.sample(&grid).unwrap();
                let e = total_energy(&field, 1.0);
                assert!(
                    (e - m.energy).abs() <= 4.0 * h,
                    "({a}, {b}) {:?}: sampled {e} vs oracle {}",
                    m.structure,
                    m.energy
                );
            }
        }
    }

    #[test]
    fn scaling_covariance() {
        // x -> s x, u -> s u maps minimizers to minimizers; energies scale by s
        let s = 2.0;
        for (a, b) in [(0.25, 0.25), (0.1, 0.0), (0.3, 0.2), (0.0, 0.4)] {
            let base = solve_1d_exact(1.0, a, b, 1.0).unwrap();
            let scaled = solve_1d_exact(s, s * a, s * b, 1.0).unwrap();
            assert_eq!(base.len(), scaled.len());
            for (m0, m1) in base.iter().zip(&scaled) {
                assert_eq!(m0.structure, m1.structure);
                assert!(
                    (m1.energy - s * m0.energy).abs() <= 1e-12 * m1.energy.max(1.0),
                    "{:?}: {} vs {}",
                    m0.structure,
                    m1.energy,
                    s * m0.energy
                );
                for (b0, b1) in m0.breakpoints.iter().zip(&m1.breakpoints) {
                    assert!((b1 - s * b0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn monotone_in_data() {
        // every minimizer for larger data dominates some minimizer for
        // smaller data pointwise
        let cases = [
            ((0.2, 0.2), (0.3, 0.3)),
            ((0.24, 0.24), (0.25, 0.25)),
            ((0.25, 0.25), (0.26, 0.26)),
            ((0.1, 0.0), (0.2, 0.1)),
        ];
        for ((a0, b0), (a1, b1)) in cases {
            let small = solve_1d_exact(1.0, a0, b0, 1.0).unwrap();
            let large = solve_1d_exact(1.0, a1, b1, 1.0).unwrap();
            for big in &large {
                let dominated = small.iter().any(|m| {
                    (0..=400).all(|k| {
                        let x = k as f64 / 400.0;
                        big.eval(x) >= m.eval(x) - 1e-12
                    })
                });
                assert!(
                    dominated,
                    "{:?} at ({a1},{b1}) dominates nothing at ({a0},{b0})",
                    big.structure
                );
            }
        }
    }

    #[test]
    fn negative_data_rejected() {
        assert!(solve_1d_exact(1.0, -0.1, 0.0, 1.0).is_err());
        assert!(solve_1d_exact(0.0, 0.1, 0.0, 1.0).is_err());
    }
}
