//! File formats: CSV dumps for grids, fields, curves, profiles, and sweeps;
//! the output manifest with content hashes.
//!
//! Floating point values are written as decimal text with 17 significant
//! digits, which round-trips f64 bit-exactly without a binary format.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::ModulusCurve;
use crate::energy::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{CellLabel, Grid};
use crate::oracle1d::Sweep1dRow;
use crate::radial::RadialProfile;
use crate::sweep::SweepRow;

/// 17 significant digits: one before the point, sixteen after.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid_csv(path: &Path, grid: &Grid) -> Result<()> {
    let mut out = String::from("ix,iy,x,y,label\n");
    for (ix, iy, x, y, label) in grid.dump_rows() {
        out.push_str(&format!(
            "{ix},{iy},{},{},{label}\n",
            format_f64(x),
            format_f64(y)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Field dump over non-exterior cells, `ix,iy,x,y,value`.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let mut out = String::from("ix,iy,x,y,value\n");
    for idx in 0..grid.num_cells() {
        if grid.label(idx) == CellLabel::Exterior {
            continue;
        }
        let (ix, iy) = grid.coords(idx);
        let c = grid.center(idx);
        out.push_str(&format!(
            "{ix},{iy},{},{},{}\n",
            format_f64(c[0]),
            format_f64(c[1]),
            format_f64(field.value(idx))
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reloads a field dump onto its grid; bit-exact against the written values.
pub fn read_field_csv(path: &Path, grid: &Arc<Grid>, lambda: f64) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("ix,iy,x,y,value") => {}
        other => {
            return Err(Error::Validation(format!(
                "unexpected field CSV header: {other:?}"
            )))
        }
    }
    let mut values = vec![0.0; grid.num_cells()];
    let mut seen = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Validation(format!(
                "field CSV line {} has {} columns",
                lineno + 2,
                cols.len()
            )));
        }
        let ix: usize = cols[0]
            .parse()
            .map_err(|e| Error::Validation(format!("bad ix on line {}: {e}", lineno + 2)))?;
        let iy: usize = cols[1]
            .parse()
            .map_err(|e| Error::Validation(format!("bad iy on line {}: {e}", lineno + 2)))?;
        let value: f64 = cols[4]
            .parse()
            .map_err(|e| Error::Validation(format!("bad value on line {}: {e}", lineno + 2)))?;
        if ix >= grid.n[0] || iy >= grid.n[1] {
            return Err(Error::Validation(format!(
                "cell ({ix}, {iy}) outside the grid"
            )));
        }
        values[grid.index(ix, iy)] = value;
        seen += 1;
    }
    let expect = grid.interior_cells().len() + grid.boundary_cells().len();
    if seen != expect {
        return Err(Error::Validation(format!(
            "field CSV has {seen} cells, grid has {expect} non-exterior cells"
        )));
    }
    ScalarField::from_values(grid, values, lambda)
}

pub fn write_modulus_csv(path: &Path, curve: &ModulusCurve) -> Result<()> {
    let mut out = String::from("delta,omega\n");
    for (d, w) in &curve.entries {
        out.push_str(&format!("{},{}\n", format_f64(*d), format_f64(*w)));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_profile_csv(path: &Path, profile: &RadialProfile) -> Result<()> {
    let mut out = String::from("r,value\n");
    for (r, v) in profile.radii.iter().zip(&profile.values) {
        out.push_str(&format!("{},{}\n", format_f64(*r), format_f64(*v)));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out =
        String::from("t,gap,energy_lower,energy_upper,converged_lower,converged_upper\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_f64(r.t),
            format_f64(r.gap),
            format_f64(r.energy_lower),
            format_f64(r.energy_upper),
            r.converged_lower,
            r.converged_upper
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_sweep1d_csv(path: &Path, rows: &[Sweep1dRow]) -> Result<()> {
    let mut out = String::from("t,count,gap_mid,energy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_f64(r.t),
            r.count,
            format_f64(r.gap_mid),
            format_f64(r.energy)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

/// Output inventory written next to every experiment's files. Identical
/// configs and seeds reproduce identical hashes; no timestamps are stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<ManifestEntry>,
}

/// Hashes the listed files (relative to `dir`) and writes `manifest.json`.
pub fn write_manifest(
    dir: &Path,
    config: serde_json::Value,
    seed: u64,
    files: &[&str],
) -> Result<PathBuf> {
    let mut outputs = Vec::new();
    for name in files {
        let p = dir.join(name);
        outputs.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(&p)?,
        });
    }
    let manifest = Manifest {
        config,
        seed,
        outputs,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryDatum;
    use crate::geometry::DomainSpec;

    #[test]
    fn field_roundtrip_is_bit_exact() {
        let grid = Arc::new(Grid::build(&DomainSpec::unit_square(), 0.25).unwrap());
        let mut field =
            ScalarField::from_datum(&grid, &BoundaryDatum::constant(0.3), 0.0, 1.0).unwrap();
        for (k, &i) in grid.interior_cells().to_vec().iter().enumerate() {
            field.values_mut()[i] = (k as f64 * 0.7391).sin().abs() / 3.0 + 1e-17;
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field_csv(&path, &field).unwrap();
        let back = read_field_csv(&path, &grid, 1.0).unwrap();
        for i in 0..grid.num_cells() {
            assert_eq!(
                field.value(i).to_bits(),
                back.value(i).to_bits(),
                "cell {i} not bit-exact"
            );
        }
    }

    #[test]
    fn seventeen_digit_format_roundtrips_awkward_values() {
        for v in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn csv_headers_match_contract() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Arc::new(Grid::build(&DomainSpec::interval(0.0, 1.0), 0.25).unwrap());
        write_grid_csv(&dir.path().join("grid.csv"), &grid).unwrap();
        let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        assert!(text.starts_with("ix,iy,x,y,label\n"));

        let curve = ModulusCurve {
            entries: vec![(0.1, 0.05), (0.2, 0.11)],
        };
        write_modulus_csv(&dir.path().join("m.csv"), &curve).unwrap();
        let text = fs::read_to_string(dir.path().join("m.csv")).unwrap();
        assert!(text.starts_with("delta,omega\n"));
    }

    #[test]
    fn manifest_hashes_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "t,gap\n0,1\n").unwrap();
        let m1 = write_manifest(
            dir.path(),
            serde_json::json!({"h": 0.25}),
            42,
            &["a.csv"],
        )
        .unwrap();
        let first = fs::read_to_string(&m1).unwrap();
        let m2 = write_manifest(
            dir.path(),
            serde_json::json!({"h": 0.25}),
            42,
            &["a.csv"],
        )
        .unwrap();
        let second = fs::read_to_string(&m2).unwrap();
        assert_eq!(first, second);
        let parsed: Manifest = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed.outputs.len(), 1);
        assert_eq!(parsed.outputs[0].sha256.len(), 64);
    }
}
