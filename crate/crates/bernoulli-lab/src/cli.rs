//! Experiment runner: config parsing, subcommand dispatch, and output layout.
//!
//! Every file-producing subcommand writes into `--out`: its data files, the
//! echoed effective config (`config.json`), and a `manifest.json` listing
//! each output with a sha256 hash. Identical configs and seeds reproduce
//! identical hashes. `BERNOULLI_LAB_THREADS` caps worker threads (0 = auto).
//!
//! Exit codes: 0 ok, 2 configuration, 3 convergence, 4 internal.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundary::{BoundaryDatum, DatumFamily};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Grid};
use crate::io;
use crate::oracle1d;
use crate::radial;
use crate::regularity;
use crate::solver::{self, Initialization, SolveOptions, Traversal};
use crate::sweep;
use crate::{acceptance, energy};

#[derive(Parser, Debug)]
#[command(
    name = "bernoulli-lab",
    about = "Numerical laboratory for the one-phase Bernoulli free boundary problem",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimize the discrete energy on a domain with a boundary datum.
    Solve(SolveArgs),
    /// Enumerate all exact 1D minimizers for endpoint data.
    Oracle1d(Oracle1dArgs),
    /// Exact symmetric 1D sweep: minimizer counts and midpoint gaps per t.
    Sweep1d(Sweep1dArgs),
    /// Critical annulus radius and the closed-form profile.
    Annulus(AnnulusArgs),
    /// Run one verification check and write its report.
    Check(CheckArgs),
    /// Sweep a monotone family with extreme solves per parameter.
    Sweep(SweepArgs),
    /// Run the full acceptance suite.
    Acceptance(AcceptanceArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Domain spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub domain: String,
    /// Boundary datum: inline JSON or a path.
    #[arg(long)]
    pub datum: String,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// single or extremes.
    #[arg(long, default_value = "single")]
    pub mode: String,
    #[arg(long)]
    pub out: PathBuf,
    /// zero, datum-sup, or harmonic.
    #[arg(long, default_value = "zero")]
    pub init: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 400_000)]
    pub max_sweeps: usize,
    /// lexicographic or red-black.
    #[arg(long, default_value = "red-black")]
    pub traversal: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct Oracle1dArgs {
    #[arg(long = "L")]
    pub length: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

#[derive(Args, Debug)]
pub struct Sweep1dArgs {
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub tmin: f64,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long)]
    pub tstep: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnnulusArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Optional radius at which to print the profile value.
    #[arg(long)]
    pub r: Option<f64>,
    /// Write the radial minimizer on [1, R] with data 1/0 as `r,value` CSV.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    /// Radial cells for the profile export.
    #[arg(long, default_value_t = 2048)]
    pub cells: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// comparison, cutpaste, barrier, equicontinuity, or holder.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub domain: String,
    /// Datum for comparison/barrier/holder; family base for equicontinuity.
    #[arg(long)]
    pub datum: Option<String>,
    /// Family spec for equicontinuity (JSON or path).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Datum shift for the comparison check.
    #[arg(long, default_value_t = 0.1)]
    pub shift: f64,
    /// Pair count for the cut-and-paste check.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
    pub seed: u64,
    /// Positivity radius for the barrier check.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Patch level for the barrier check.
    #[arg(long)]
    pub level: Option<f64>,
    /// Hölder exponent.
    #[arg(long, default_value_t = 0.75)]
    pub gamma: f64,
    /// Boundary band width for the Hölder check.
    #[arg(long)]
    pub band: Option<f64>,
    /// Family parameters for the equicontinuity check.
    #[arg(long, default_value_t = 0.2)]
    pub tmin: f64,
    #[arg(long, default_value_t = 0.8)]
    pub tmax: f64,
    #[arg(long, default_value_t = 4)]
    pub tcount: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub tmin: f64,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long)]
    pub tstep: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AcceptanceArgs {
    #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inline JSON (starts with '{') or a path to a JSON file.
pub fn load_json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)
            .map_err(|e| Error::Config(format!("{what}: cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{what}: {e}")))
}

fn parse_init(s: &str) -> Result<Initialization> {
    Ok(match s {
        "zero" => Initialization::Zero,
        "datum-sup" => Initialization::DatumSup,
        "harmonic" => Initialization::Harmonic,
        other => {
            return Err(Error::Config(format!(
                "init: unknown initialization {other:?} (zero, datum-sup, harmonic)"
            )))
        }
    })
}

fn parse_traversal(s: &str) -> Result<Traversal> {
    Ok(match s {
        "lexicographic" => Traversal::Lexicographic,
        "red-black" => Traversal::RedBlack,
        other => {
            return Err(Error::Config(format!(
                "traversal: unknown traversal {other:?} (lexicographic, red-black)"
            )))
        }
    })
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("out: cannot create {}: {e}", dir.display())))
}

fn t_grid(tmin: f64, tmax: f64, tstep: f64) -> Result<Vec<f64>> {
    if !(tstep > 0.0) || tmax < tmin {
        return Err(Error::Config(
            "tmin/tmax/tstep: need tstep > 0 and tmax >= tmin".into(),
        ));
    }
    let count = ((tmax - tmin) / tstep).round() as usize;
    Ok((0..=count).map(|k| tmin + k as f64 * tstep).collect())
}

/// Effective configuration echoed into every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

fn write_config(dir: &Path, config: &EffectiveConfig) -> Result<()> {
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(config)?,
    )?;
    Ok(())
}

pub fn run_solve(args: &SolveArgs) -> Result<i32> {
    let spec: DomainSpec = load_json_arg(&args.domain, "domain")?;
    let datum: BoundaryDatum = load_json_arg(&args.datum, "datum")?;
    let grid = Arc::new(Grid::build(&spec, args.h)?);
    let opts = SolveOptions {
        lambda: args.lambda,
        max_sweeps: args.max_sweeps,
        tolerance: args.tolerance,
        init: parse_init(&args.init)?,
        traversal: parse_traversal(&args.traversal)?,
        record_energy_trace: false,
    };
    ensure_out(&args.out)?;
    let config = EffectiveConfig {
        subcommand: "solve".into(),
        params: json!({
            "domain": spec,
            "datum": datum,
            "h": args.h,
            "lambda": args.lambda,
            "mode": args.mode,
            "init": args.init,
            "tolerance": args.tolerance,
            "max_sweeps": args.max_sweeps,
            "traversal": args.traversal,
        }),
        seed: args.seed,
    };
    write_config(&args.out, &config)?;

    let all_converged;
    let mut files: Vec<&str> = vec!["config.json"];
    match args.mode.as_str() {
        "single" => {
            let (field, report) = solver::solve(&grid, &datum, &opts)?;
            all_converged = report.converged;
            io::write_field_csv(&args.out.join("field.csv"), &field)?;
            fs::write(
                args.out.join("report.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            files.extend(["field.csv", "report.json"]);
        }
        "extremes" => {
            let (lower, upper, (rl, ru)) = solver::solve_extremes(&grid, &datum, &opts)?;
            all_converged = rl.converged && ru.converged;
            io::write_field_csv(&args.out.join("field_lower.csv"), &lower)?;
            io::write_field_csv(&args.out.join("field_upper.csv"), &upper)?;
            let gap = lower.max_norm_distance(&upper)?;
            fs::write(
                args.out.join("report.json"),
                serde_json::to_string_pretty(&json!({
                    "mode": "extremes",
                    "lower": rl,
                    "upper": ru,
                    "gap": gap,
                }))?,
            )?;
            files.extend(["field_lower.csv", "field_upper.csv", "report.json"]);
        }
        other => {
            return Err(Error::Config(format!(
                "mode: unknown mode {other:?} (single, extremes)"
            )))
        }
    }
    io::write_manifest(&args.out, serde_json::to_value(&config)?, args.seed, &files)?;
    Ok(if all_converged { 0 } else { 3 })
}

pub fn run_oracle1d(args: &Oracle1dArgs) -> Result<i32> {
    let minimizers = oracle1d::solve_1d_exact(args.length, args.a, args.b, args.lambda)?;
    println!("{}", serde_json::to_string_pretty(&minimizers)?);
    Ok(0)
}

pub fn run_sweep1d(args: &Sweep1dArgs) -> Result<i32> {
    let family = DatumFamily::additive(BoundaryDatum::constant(0.0), 1.0);
    let ts = t_grid(args.tmin, args.tmax, args.tstep)?;
    let rows = oracle1d::sweep_1d(&family, args.length, args.lambda, &ts)?;
    ensure_out(&args.out)?;
    let config = EffectiveConfig {
        subcommand: "sweep1d".into(),
        params: json!({
            "L": args.length,
            "lambda": args.lambda,
            "tmin": args.tmin,
            "tmax": args.tmax,
            "tstep": args.tstep,
        }),
        seed: 0,
    };
    write_config(&args.out, &config)?;
    io::write_sweep1d_csv(&args.out.join("sweep1d.csv"), &rows)?;
    io::write_manifest(
        &args.out,
        serde_json::to_value(&config)?,
        0,
        &["config.json", "sweep1d.csv"],
    )?;
    Ok(0)
}

pub fn run_annulus(args: &AnnulusArgs) -> Result<i32> {
    let radius = radial::critical_radius(args.d, args.lambda)?;
    println!("R({}, lambda = {}) = {:.12}", args.d, args.lambda, radius);
    if let Some(r) = args.r {
        let v = radial::annulus_solution_with_radius(args.d, r, radius)?;
        println!("v1({r}) = {v:.12}");
    }
    if let Some(path) = &args.profile_out {
        let profile =
            radial::radial_minimize(args.d, 1.0, radius, 1.0, 0.0, args.lambda, args.cells)?;
        io::write_profile_csv(path, &profile)?;
        println!("profile with {} cells written to {}", args.cells, path.display());
    }
    Ok(0)
}

pub fn run_check(args: &CheckArgs) -> Result<i32> {
    let spec: DomainSpec = load_json_arg(&args.domain, "domain")?;
    let grid = Arc::new(Grid::build(&spec, args.h)?);
    ensure_out(&args.out)?;
    let opts = SolveOptions {
        lambda: args.lambda,
        ..SolveOptions::default()
    };
    let mut files: Vec<String> = vec!["config.json".into(), "report.json".into()];
    let need_datum = |what: &str| -> Result<BoundaryDatum> {
        args.datum
            .as_deref()
            .ok_or_else(|| Error::Config(format!("datum: required for the {what} check")))
            .and_then(|d| load_json_arg(d, "datum"))
    };

    let report: serde_json::Value = match args.kind.as_str() {
        "comparison" => {
            let base = need_datum("comparison")?;
            if !(args.shift > 0.0) {
                return Err(Error::Config("shift: must be positive".into()));
            }
            let shifted = BoundaryDatum {
                rule: crate::boundary::DatumRule::FamilyMember {
                    base: Box::new(base.rule.clone()),
                    family: crate::boundary::FamilyKind::AdditiveShift,
                    rate: 1.0,
                    t: args.shift,
                },
                nonnegative: true,
            };
            let (lo1, up1, (r1l, r1u)) = solver::solve_extremes(&grid, &base, &opts)?;
            let (lo2, up2, (r2l, r2u)) = solver::solve_extremes(&grid, &shifted, &opts)?;
            if !(r1l.converged && r1u.converged && r2l.converged && r2u.converged) {
                return Err(Error::Convergence(
                    "comparison check needs converged solves".into(),
                ));
            }
            let lower = regularity::check_comparison(&lo1, &lo2, 1e-8)?;
            let upper = regularity::check_comparison(&up1, &up2, 1e-8)?;
            json!({ "lower": lower, "upper": upper, "pass": lower.pass && upper.pass })
        }
        "cutpaste" => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let boundary: Vec<f64> = (0..grid.boundary_cells().len())
                .map(|_| rng.gen_range(0.0..1.0))
                .collect();
            let mut min_slack = f64::INFINITY;
            let mut all_pass = true;
            for _ in 0..args.pairs {
                let mk = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<energy::ScalarField> {
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
                    energy::ScalarField::from_values(&grid, vals, args.lambda)
                };
                let u = mk(&mut rng)?;
                let v = mk(&mut rng)?;
                let rep = regularity::check_cut_paste(&u, &v, args.lambda)?;
                min_slack = min_slack.min(rep.params["slack"].as_f64().unwrap());
                all_pass &= rep.pass;
            }
            json!({ "pairs": args.pairs, "min_slack": min_slack, "pass": all_pass })
        }
        "barrier" => {
            let datum = need_datum("barrier")?;
            let level = args
                .level
                .ok_or_else(|| Error::Config("level: required for the barrier check".into()))?;
            let (u, rep) = solver::solve(&grid, &datum, &opts)?;
            if !rep.converged {
                return Err(Error::Convergence("barrier check needs a converged solve".into()));
            }
            let patch: Vec<usize> = grid
                .boundary_cells()
                .iter()
                .copied()
                .filter(|&b| u.value(b) >= level - 1e-12)
                .collect();
            let scan = regularity::barrier_scan(&u, &patch, level, 2.0)?;
            match args.rho {
                Some(rho) => {
                    let check = regularity::check_barrier_positivity(&u, &patch, level, rho)?;
                    json!({ "check": check, "largest_passing_rho": scan, "pass": check.pass })
                }
                None => json!({ "largest_passing_rho": scan, "pass": scan > 0.0 }),
            }
        }
        "equicontinuity" => {
            let family: DatumFamily = match &args.family {
                Some(f) => load_json_arg(f, "family")?,
                None => DatumFamily::scaling(need_datum("equicontinuity")?, 1.0),
            };
            if args.tcount < 2 {
                return Err(Error::Config("tcount: need at least 2 members".into()));
            }
            let ts: Vec<f64> = (0..args.tcount)
                .map(|k| {
                    args.tmin + (args.tmax - args.tmin) * k as f64 / (args.tcount - 1) as f64
                })
                .collect();
            let mut fields = Vec::new();
            for &t in &ts {
                let (f, rep) = solver::solve(&grid, &family.member(t)?, &opts)?;
                if !rep.converged {
                    return Err(Error::Convergence(format!(
                        "equicontinuity member t = {t} did not converge"
                    )));
                }
                fields.push(f);
            }
            let deltas: Vec<f64> = (0..7)
                .map(|k| grid.h * 2.0f64.powi(k))
                .collect();
            let (curves, envelope) = regularity::equicontinuity_report(&fields, &deltas)?;
            for (k, curve) in curves.iter().enumerate() {
                let name = format!("modulus_{k}.csv");
                io::write_modulus_csv(&args.out.join(&name), curve)?;
                files.push(name);
            }
            io::write_modulus_csv(&args.out.join("envelope.csv"), &envelope)?;
            files.push("envelope.csv".into());
            json!({
                "t_grid": ts,
                "envelope": envelope.entries,
                "pass": envelope.check_invariants(),
            })
        }
        "holder" => {
            let datum = need_datum("holder")?;
            let band = args.band.unwrap_or(8.0 * grid.h);
            let (u, rep) = solver::solve(&grid, &datum, &opts)?;
            if !rep.converged {
                return Err(Error::Convergence("holder check needs a converged solve".into()));
            }
            let q = regularity::boundary_holder_quotient(&u, args.gamma, band)?;
            json!({ "gamma": args.gamma, "band": band, "quotient": q, "pass": q.is_finite() })
        }
        other => {
            return Err(Error::Config(format!(
                "kind: unknown check {other:?} \
                 (comparison, cutpaste, barrier, equicontinuity, holder)"
            )))
        }
    };

    let config = EffectiveConfig {
        subcommand: format!("check:{}", args.kind),
        params: json!({
            "domain": spec,
            "h": args.h,
            "lambda": args.lambda,
            "kind": args.kind,
            "datum": args.datum,
            "family": args.family,
            "shift": args.shift,
            "pairs": args.pairs,
            "rho": args.rho,
            "level": args.level,
            "gamma": args.gamma,
            "band": args.band,
            "tmin": args.tmin,
            "tmax": args.tmax,
            "tcount": args.tcount,
        }),
        seed: args.seed,
    };
    write_config(&args.out, &config)?;
    fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    let file_refs: Vec<&str> = files.iter().map(|s| s.as_str()).collect();
    io::write_manifest(&args.out, serde_json::to_value(&config)?, args.seed, &file_refs)?;
    Ok(0)
}

pub fn run_sweep_cmd(args: &SweepArgs) -> Result<i32> {
    let spec: DomainSpec = load_json_arg(&args.domain, "domain")?;
    let family: DatumFamily = load_json_arg(&args.family, "family")?;
    let grid = Arc::new(Grid::build(&spec, args.h)?);
    let ts = t_grid(args.tmin, args.tmax, args.tstep)?;
    let opts = SolveOptions {
        lambda: args.lambda,
        ..SolveOptions::default()
    };
    let result = sweep::run_sweep(&grid, &family, &ts, &opts)?;
    ensure_out(&args.out)?;
    let config = EffectiveConfig {
        subcommand: "sweep".into(),
        params: json!({
            "domain": spec,
            "family": family,
            "h": args.h,
            "lambda": args.lambda,
            "tmin": args.tmin,
            "tmax": args.tmax,
            "tstep": args.tstep,
        }),
        seed: args.seed,
    };
    write_config(&args.out, &config)?;
    io::write_sweep_csv(&args.out.join("sweep.csv"), &result.rows)?;
    let jumps = sweep::jump_set(&result.rows, sweep::default_gap_tol(args.h));
    fs::write(
        args.out.join("jumps.json"),
        serde_json::to_string_pretty(&json!({
            "jumps": jumps,
            "lower_order_min": result.lower_order_min,
            "upper_order_min": result.upper_order_min,
            "energy_decreases": result.energy_decreases,
        }))?,
    )?;
    io::write_manifest(
        &args.out,
        serde_json::to_value(&config)?,
        args.seed,
        &["config.json", "sweep.csv", "jumps.json"],
    )?;
    let all_converged = result
        .rows
        .iter()
        .all(|r| r.converged_lower && r.converged_upper);
    Ok(if all_converged { 0 } else { 3 })
}

pub fn run_acceptance(args: &AcceptanceArgs) -> Result<i32> {
    let outcomes = acceptance::run_all(args.seed);
    for line in acceptance::summary_lines(&outcomes) {
        println!("{line}");
    }
    if let Some(dir) = &args.out {
        ensure_out(dir)?;
        fs::write(
            dir.join("acceptance.json"),
            serde_json::to_string_pretty(&outcomes)?,
        )?;
    }
    let errored = outcomes.iter().any(|o| o.error.is_some());
    Ok(if errored { 4 } else { 0 })
}

/// Applies `BERNOULLI_LAB_THREADS` (0 or unset = auto) to the global pool.
pub fn configure_threads() {
    if let Ok(v) = std::env::var("BERNOULLI_LAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Oracle1d(a) => run_oracle1d(a),
        Command::Sweep1d(a) => run_sweep1d(a),
        Command::Annulus(a) => run_annulus(a),
        Command::Check(a) => run_check(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Acceptance(a) => run_acceptance(a),
    }
}
