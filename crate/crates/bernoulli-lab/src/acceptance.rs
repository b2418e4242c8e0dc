//! The end-to-end verification suite: nine numbered criteria covering the
//! critical radius, annulus convergence, the exact 1D tie, the comparison
//! principle, cut-and-paste submodularity, the free-boundary gradient,
//! equicontinuity, boundary Hölder quotients, and barrier positivity.
//!
//! Each criterion is a standalone function returning a [`CriterionOutcome`];
//! the CLI `acceptance` subcommand and the `acceptance` integration test both
//! drive [`run_all`]. Tolerances are pinned here, not configurable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::sync::Arc;
use std::time::Instant;

use crate::boundary::{BoundaryDatum, DatumFamily};
use crate::energy::{total_energy, ScalarField};
use crate::error::Result;
use crate::geometry::{DomainSpec, Grid};
use crate::oracle1d;
use crate::radial;
use crate::regularity;
use crate::solver::{
    gradient_on_free_boundary, solve, solve_extremes, Initialization, SolveOptions,
};

pub const CRITERIA_COUNT: usize = 9;

/// Default seed for the randomized criteria; recorded in every outcome.
pub const DEFAULT_SEED: u64 = 1776;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    /// Present when the criterion errored rather than ran to a verdict.
    pub error: Option<String>,
    pub measured: serde_json::Value,
    pub runtime_s: f64,
    pub seed: u64,
}

fn finish(
    id: usize,
    name: &str,
    seed: u64,
    started: Instant,
    limit_s: f64,
    result: Result<(bool, serde_json::Value)>,
) -> CriterionOutcome {
    let runtime_s = started.elapsed().as_secs_f64();
    match result {
        Ok((mut passed, mut measured)) => {
            let within_budget = runtime_s < limit_s;
            if let Some(map) = measured.as_object_mut() {
                map.insert("runtime_limit_s".into(), json!(limit_s));
                map.insert("runtime_ok".into(), json!(within_budget));
            }
            passed = passed && within_budget;
            CriterionOutcome {
                id,
                name: name.into(),
                passed,
                error: None,
                measured,
                runtime_s,
                seed,
            }
        }
        Err(e) => CriterionOutcome {
            id,
            name: name.into(),
            passed: false,
            error: Some(e.to_string()),
            measured: json!({}),
            runtime_s,
            seed,
        },
    }
}

/// 1. Critical radius values, bisection-Newton agreement, and range.
pub fn criterion_1_critical_radius(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let r2 = radial::critical_radius(2, 1.0)?;
        let r2_newton = radial::critical_radius_newton(2, 1.0)?;
        let r3 = radial::critical_radius(3, 1.0)?;
        let r3_newton = radial::critical_radius_newton(3, 1.0)?;
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let root_residual = (r2 * r2.ln() - 1.0).abs();
        let cross2 = (r2 - r2_newton).abs();
        let cross3 = (r3 - r3_newton).abs();
        let golden = (r3 - phi).abs();
        let mut in_range = true;
        for d in 2..=7 {
            let r = radial::critical_radius(d, 1.0)?;
            in_range &= r > 1.0 && r < 2.0;
        }
        let passed = root_residual <= 1e-10
            && cross2 <= 1e-10
            && cross3 <= 1e-10
            && golden <= 1e-10
            && in_range;
        Ok((
            passed,
            json!({
                "radius_d2": r2,
                "radius_d3": r3,
                "root_residual_d2": root_residual,
                "bisection_newton_gap_d2": cross2,
                "bisection_newton_gap_d3": cross3,
                "golden_ratio_gap": golden,
                "all_in_unit_interval": in_range,
            }),
        ))
    };
    finish(1, "critical-radius", seed, t0, 1.0, body())
}

fn annulus_solve_error(h: f64) -> Result<f64> {
    let radius = radial::critical_radius(2, 1.0)?;
    let spec = DomainSpec::annulus([0.0, 0.0], 1.0, radius);
    let grid = Arc::new(Grid::build(&spec, h)?);
    let datum = BoundaryDatum::radial_step([0.0, 0.0], (1.0 + radius) / 2.0, 1.0, 0.0);
    let opts = SolveOptions {
        init: Initialization::Harmonic,
        ..SolveOptions::default()
    };
    let (u, _) = solve(&grid, &datum, &opts)?;
    let mut worst = 0.0f64;
    for &i in grid.interior_cells() {
        let c = grid.center(i);
        let r = (c[0] * c[0] + c[1] * c[1]).sqrt().clamp(1.0, radius);
        let exact = radial::annulus_solution_with_radius(2, r, radius)?;
        worst = worst.max((u.value(i) - exact).abs());
    }
    Ok(worst)
}

/// 2. Annulus solves converge to the closed-form profile at first order.
pub fn criterion_2_annulus_convergence(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let errors = hs
            .par_iter()
            .map(|&h| annulus_solve_error(h))
            .collect::<Result<Vec<f64>>>()?;
        let ratio_32_64 = errors[0] / errors[1];
        let ratio_64_128 = errors[1] / errors[2];
        let passed = errors[1] <= 0.05 && ratio_32_64 >= 1.5 && ratio_64_128 >= 1.5;
        Ok((
            passed,
            json!({
                "error_h32": errors[0],
                "error_h64": errors[1],
                "error_h128": errors[2],
                "ratio_32_64": ratio_32_64,
                "ratio_64_128": ratio_64_128,
            }),
        ))
    };
    finish(2, "annulus-convergence", seed, t0, 60.0, body())
}

/// 3. Exact 1D non-uniqueness at the tie and jump-width halving.
pub fn criterion_3_oracle_tie(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let minimizers = oracle1d::solve_1d_exact(1.0, 0.25, 0.25, 1.0)?;
        let two = minimizers.len() == 2;
        let energies_ok = minimizers
            .iter()
            .all(|m| (m.energy - 1.0).abs() <= 1e-12);

        let fam = DatumFamily::additive(BoundaryDatum::constant(0.0), 1.0);
        let coarse: Vec<f64> = (1..100).map(|k| k as f64 * 0.01).collect();
        let fine: Vec<f64> = (1..200).map(|k| k as f64 * 0.005).collect();
        let rows_c = oracle1d::sweep_1d(&fam, 1.0, 1.0, &coarse)?;
        let rows_f = oracle1d::sweep_1d(&fam, 1.0, 1.0, &fine)?;
        let jumps_c: Vec<f64> = rows_c
            .iter()
            .filter(|r| r.count >= 2)
            .map(|r| r.t)
            .collect();
        let located = !jumps_c.is_empty() && jumps_c.iter().all(|t| (t - 0.25).abs() <= 0.01);
        let w_c = oracle1d::sweep_1d_jump_width(&rows_c);
        let w_f = oracle1d::sweep_1d_jump_width(&rows_f);
        let halved = (w_f - w_c / 2.0).abs() <= 0.005 + 1e-12;

        let passed = two && energies_ok && located && halved;
        Ok((
            passed,
            json!({
                "minimizer_count": minimizers.len(),
                "energies": minimizers.iter().map(|m| m.energy).collect::<Vec<_>>(),
                "jump_locations": jumps_c,
                "jump_width_coarse": w_c,
                "jump_width_fine": w_f,
            }),
        ))
    };
    finish(3, "oracle-1d-tie", seed, t0, 1.0, body())
}

/// 4. Comparison principle for 20 seeded (g, g + c) pairs on two domains.
pub fn criterion_4_comparison(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let h = 1.0 / 64.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cases: Vec<(DomainSpec, BoundaryDatum, f64)> = Vec::new();
        for k in 0..20 {
            let spec = if k % 2 == 0 {
                DomainSpec::unit_square()
            } else {
                DomainSpec::disk([0.0, 0.0], 1.0)
            };
            let c: f64 = rng.gen_range(0.05..0.5);
            let g = if k % 4 < 2 {
                BoundaryDatum::constant(rng.gen_range(0.02..0.6))
            } else {
                // positive sloped datum: offset dominates the slope on both
                // domains (diameter <= 2 about the origin)
                let slope: f64 = rng.gen_range(-0.2..0.2);
                let offset = rng.gen_range(0.05..0.4) + 2.0 * slope.abs();
                BoundaryDatum::linear([slope, 0.0], offset)
            };
            cases.push((spec, g, c));
        }
        let worst = cases
            .par_iter()
            .map(|(spec, g, c)| -> Result<f64> {
                let grid = Arc::new(Grid::build(spec, h)?);
                let opts = SolveOptions::default();
                let g_up = BoundaryDatum {
                    rule: crate::boundary::DatumRule::FamilyMember {
                        base: Box::new(g.rule.clone()),
                        family: crate::boundary::FamilyKind::AdditiveShift,
                        rate: 1.0,
                        t: *c,
                    },
                    nonnegative: true,
                };
                let (lo1, up1, _) = solve_extremes(&grid, g, &opts)?;
                let (lo2, up2, _) = solve_extremes(&grid, &g_up, &opts)?;
                let (m1, _) = lo1.min_gap_to(&lo2)?;
                let (m2, _) = up1.min_gap_to(&up2)?;
                Ok(m1.min(m2))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let passed = worst >= -1e-8;
        Ok((
            passed,
            json!({ "pairs": 20, "h": h, "worst_ordering_gap": worst }),
        ))
    };
    finish(4, "comparison-principle", seed, t0, 300.0, body())
}

/// 5. Cut-and-paste slack on random pairs and on converged extreme solves.
pub fn criterion_5_cut_paste(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let grid = Arc::new(Grid::build(&DomainSpec::unit_square(), 1.0 / 32.0)?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_slack = f64::INFINITY;
        for _ in 0..100 {
            let boundary: Vec<f64> = (0..grid.boundary_cells().len())
                .map(|_| rng.gen_range(0.0..1.0))
                .collect();
            let mk = |rng: &mut ChaCha8Rng| {
                let mut vals = vec![0.0; grid.num_cells()];
                for &i in grid.interior_cells() {
                    vals[i] = if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    };
                }
                for (k, &b) in grid.boundary_cells().iter().enumerate() {
                    vals[b] = boundary[k];
                }
                ScalarField::from_values(&grid, vals, 1.0)
            };
            let u = mk(&mut rng)?;
            let v = mk(&mut rng)?;
            let rep = regularity::check_cut_paste(&u, &v, 1.0)?;
            min_slack = min_slack.min(rep.params["slack"].as_f64().unwrap());
        }
        let random_ok = min_slack >= -1e-12;

        // converged extreme solves at one datum: E(max) stays within solver
        // tolerance of the lower solve's energy
        let opts = SolveOptions::default();
        let mut worst_energy_gap = 0.0f64;
        for (spec, level) in [
            (DomainSpec::unit_square(), 0.7),
            (DomainSpec::disk([0.0, 0.0], 1.0), 0.6),
        ] {
            let grid = Arc::new(Grid::build(&spec, 1.0 / 64.0)?);
            let datum = BoundaryDatum::constant(level);
            let (lower, upper, (rl, ru)) = solve_extremes(&grid, &datum, &opts)?;
            if !(rl.converged && ru.converged) {
                return Ok((false, json!({"error": "extreme solve did not converge"})));
            }
            let (hi, _) = lower.max_min(&upper)?;
            let gap = (total_energy(&hi, 1.0) - rl.energy).abs();
            worst_energy_gap = worst_energy_gap.max(gap);
        }
        let solves_ok = worst_energy_gap <= 10.0 * opts.tolerance;

        Ok((
            random_ok && solves_ok,
            json!({
                "random_pairs": 100,
                "min_slack": min_slack,
                "max_energy_gap": worst_energy_gap,
                "energy_gap_limit": 10.0 * opts.tolerance,
            }),
        ))
    };
    finish(5, "cut-paste-submodularity", seed, t0, 30.0, body())
}

/// 6. Free-boundary gradient: exact 1D slopes and the annulus median.
pub fn criterion_6_free_boundary_gradient(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let mut slopes_exact = true;
        for lambda in [1.0, 2.0, 4.0] {
            let s = f64::sqrt(lambda);
            for m in oracle1d::solve_1d_exact(1.0, 0.1, 0.0, lambda)? {
                for slope in &m.free_slopes {
                    slopes_exact &= *slope == s;
                }
            }
        }

        let radius = radial::critical_radius(2, 1.0)?;
        let spec = DomainSpec::annulus([0.0, 0.0], 1.0, radius);
        let grid = Arc::new(Grid::build(&spec, 1.0 / 128.0)?);
        let datum = BoundaryDatum::radial_step([0.0, 0.0], (1.0 + radius) / 2.0, 1.0, 0.0);
        let opts = SolveOptions {
            init: Initialization::Harmonic,
            ..SolveOptions::default()
        };
        let (u, rep) = solve(&grid, &datum, &opts)?;
        let stats = gradient_on_free_boundary(&u);
        let median = stats.median.unwrap_or(f64::NAN);
        let in_band = median >= 0.8 && median <= 1.2;

        Ok((
            slopes_exact && in_band && rep.converged,
            json!({
                "oracle_slopes_exact": slopes_exact,
                "free_boundary_cells": stats.count,
                "median_gradient": median,
                "interquartile_range": stats.interquartile_range,
            }),
        ))
    };
    finish(6, "free-boundary-gradient", seed, t0, 120.0, body())
}

/// 7. Equicontinuity envelope decay across the scaling family on the disk.
pub fn criterion_7_equicontinuity(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let spec = DomainSpec::disk([0.0, 0.0], 1.0);
        let grid = Arc::new(Grid::build(&spec, 1.0 / 64.0)?);
        let base = BoundaryDatum::linear([0.5, 0.0], 0.5);
        let fam = DatumFamily::scaling(base.clone(), 1.0);
        let opts = SolveOptions::default();
        let ts = [0.2, 0.4, 0.6, 0.8, 1.0];
        let fields: Vec<ScalarField> = ts
            .par_iter()
            .map(|&t| -> Result<ScalarField> {
                // t = 1 is the family's base datum itself
                let datum = if t < 1.0 { fam.member(t)? } else { base.clone() };
                Ok(solve(&grid, &datum, &opts)?.0)
            })
            .collect::<Result<Vec<_>>>()?;
        let deltas: Vec<f64> = (0..=7).map(|k| 2.0f64.powi(k - 6)).collect(); // 1/64 .. 2
        let (_, envelope) = regularity::equicontinuity_report(&fields, &deltas)?;
        let monotone = envelope.check_invariants();
        let decay = envelope.omega_at_smallest() <= 0.5 * envelope.omega_at_largest();
        Ok((
            monotone && decay,
            json!({
                "deltas": deltas,
                "envelope": envelope.entries,
                "monotone": monotone,
                "omega_min": envelope.omega_at_smallest(),
                "omega_max": envelope.omega_at_largest(),
            }),
        ))
    };
    finish(7, "equicontinuity-envelope", seed, t0, 180.0, body())
}

/// 8. Boundary Hölder quotients: stable at the datum's exponent, divergent
/// above it at the stated rate.
pub fn criterion_8_holder(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let spec = DomainSpec::disk([0.0, 0.0], 1.0);
        let datum = BoundaryDatum::power([1.0, 0.0], 0.75);
        let band = 0.1;
        let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let opts = SolveOptions {
            init: Initialization::Harmonic,
            ..SolveOptions::default()
        };
        let quotients = hs
            .par_iter()
            .map(|&h| -> Result<(f64, f64)> {
                let grid = Arc::new(Grid::build(&spec, h)?);
                let (u, _) = solve(&grid, &datum, &opts)?;
                let q75 = regularity::boundary_holder_quotient(&u, 0.75, band)?;
                let q95 = regularity::boundary_holder_quotient(&u, 0.95, band)?;
                Ok((q75, q95))
            })
            .collect::<Result<Vec<_>>>()?;
        let q75: Vec<f64> = quotients.iter().map(|q| q.0).collect();
        let q95: Vec<f64> = quotients.iter().map(|q| q.1).collect();
        let spread75 = q75.iter().cloned().fold(f64::MIN, f64::max)
            / q75.iter().cloned().fold(f64::MAX, f64::min);
        let growth95 = q95[2] / q95[0];
        let stable = spread75 <= 1.25;
        let divergent = growth95 >= 1.5;
        Ok((
            stable && divergent,
            json!({
                "band": band,
                "quotients_gamma075": q75,
                "quotients_gamma095": q95,
                "spread_gamma075": spread75,
                "growth_gamma095": growth95,
            }),
        ))
    };
    finish(8, "holder-boundedness", seed, t0, 180.0, body())
}

/// 9. Barrier positivity radius is positive and dyadically stable.
pub fn criterion_9_barrier(seed: u64) -> CriterionOutcome {
    let t0 = Instant::now();
    let body = || -> Result<(bool, serde_json::Value)> {
        let spec = DomainSpec::unit_square();
        let level = 2.0;
        let scan = |h: f64| -> Result<f64> {
            let grid = Arc::new(Grid::build(&spec, h)?);
            // level on the left edge, vanishing within one cell of it
            let datum = BoundaryDatum {
                rule: crate::boundary::DatumRule::Linear {
                    coeffs: [-level / h, 0.0],
                    offset: level,
                    clamp: true,
                },
                nonnegative: true,
            };
            let (u, _) = solve(&grid, &datum, &SolveOptions::default())?;
            let patch: Vec<usize> = grid
                .boundary_cells()
                .iter()
                .copied()
                .filter(|&b| u.value(b) >= level - 1e-9)
                .collect();
            regularity::barrier_scan(&u, &patch, level - 1e-9, 2.0)
        };
        let rho_64 = scan(1.0 / 64.0)?;
        let rho_128 = scan(1.0 / 128.0)?;
        let positive = rho_64 > 0.0 && rho_128 > 0.0;
        let stable = positive && (rho_64 / rho_128).log2().abs() <= 1.0 + 1e-12;
        Ok((
            positive && stable,
            json!({ "rho_h64": rho_64, "rho_h128": rho_128 }),
        ))
    };
    finish(9, "barrier-positivity", seed, t0, 60.0, body())
}

/// Runs the whole suite in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    vec![
        criterion_1_critical_radius(seed),
        criterion_2_annulus_convergence(seed),
        criterion_3_oracle_tie(seed),
        criterion_4_comparison(seed),
        criterion_5_cut_paste(seed),
        criterion_6_free_boundary_gradient(seed),
        criterion_7_equicontinuity(seed),
        criterion_8_holder(seed),
        criterion_9_barrier(seed),
    ]
}

/// One `criterion N (name): PASS|FAIL` line per outcome.
pub fn summary_lines(outcomes: &[CriterionOutcome]) -> Vec<String> {
    outcomes
        .iter()
        .map(|o| {
            let verdict = match (&o.error, o.passed) {
                (Some(e), _) => format!("ERROR ({e})"),
                (None, true) => "PASS".to_string(),
                (None, false) => "FAIL".to_string(),
            };
            format!(
                "criterion {} ({}): {} [{:.2}s]",
                o.id, o.name, verdict, o.runtime_s
            )
        })
        .collect()
}
