//! CSV and JSON writers for fields, spectra and diagnostics.
//!
//! CSV files use `,` separators, `.` decimals and a header row. Floats are written in
//! Rust's shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{ContainmentReport, SweepTable};
use crate::eigensolver::EigenSolution;
use crate::error::Result;
use crate::observables::{BondField, Profile, ScalarField};

/// Columns `ix,iy,x,y,value`.
pub fn write_scalar_field<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    writeln!(out, "ix,iy,x,y,value")?;
    let g = &field.geometry;
    for (p, v) in field.values.iter().enumerate() {
        let s = g.site(p);
        let (x, y) = g.coords(p);
        writeln!(out, "{},{},{x},{y},{v}", s.ix, s.iy)?;
    }
    Ok(())
}

/// Columns `ix,iy,direction,x_mid,y_mid,value`, keyed by the bond's starting site.
/// With `residuals`, a trailing `continuity_residual` column holds the larger net
/// inflow of the two end sites.
pub fn write_bond_field<W: Write>(field: &BondField, residuals: Option<&[f64]>, mut out: W) -> Result<()> {
    write!(out, "ix,iy,direction,x_mid,y_mid,value")?;
    if residuals.is_some() {
        write!(out, ",continuity_residual")?;
    }
    writeln!(out)?;
    let g = &field.geometry;
    for (b, v) in field.bonds.iter().zip(&field.values) {
        let s = g.site(b.from);
        let (x0, y0) = g.coords(b.from);
        let (x1, y1) = g.coords(b.to);
        write!(out, "{},{},{},{},{},{v}", s.ix, s.iy, b.direction.label(), 0.5 * (x0 + x1), 0.5 * (y0 + y1))?;
        if let Some(r) = residuals {
            write!(out, ",{}", r[b.from].abs().max(r[b.to].abs()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Columns `coord,value`.
pub fn write_profile<W: Write>(profile: &Profile, mut out: W) -> Result<()> {
    writeln!(out, "coord,value")?;
    for (c, v) in profile.coords.iter().zip(&profile.values) {
        writeln!(out, "{c},{v}")?;
    }
    Ok(())
}

/// Analytic `(j, k, E)` label attached to a computed level.
pub type AnalyticLabel = (u32, u32, f64);

/// Columns `index,energy,shifted_energy,residual,multiplet`, plus `j,k,analytic` when
/// labels are given.
pub fn write_spectrum<W: Write>(
    solution: &EigenSolution,
    shift: f64,
    labels: Option<&[AnalyticLabel]>,
    mut out: W,
) -> Result<()> {
    write!(out, "index,energy,shifted_energy,residual,multiplet")?;
    if labels.is_some() {
        write!(out, ",j,k,analytic")?;
    }
    writeln!(out)?;
    for (i, e) in solution.eigenvalues.iter().enumerate() {
        let multiplet = solution.multiplets.iter().position(|r| r.contains(&i)).unwrap_or(usize::MAX);
        write!(out, "{i},{e},{},{},{multiplet}", e + shift, solution.residuals[i])?;
        if let Some(labels) = labels {
            match labels.get(i) {
                Some((j, k, a)) => write!(out, ",{j},{k},{a}")?,
                None => write!(out, ",,,")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Columns `bigomega,ground_energy,shifted_energy,boundary_mass,verdict,converged`.
pub fn write_sweep<W: Write>(table: &SweepTable, mut out: W) -> Result<()> {
    writeln!(out, "bigomega,ground_energy,shifted_energy,boundary_mass,verdict,converged")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.bigomega,
            r.ground_energy,
            r.shifted_energy,
            r.boundary_mass,
            r.verdict.label(),
            r.converged
        )?;
    }
    Ok(())
}

/// One row per run, with the report-wide fields repeated on every row.
pub fn write_report<W: Write>(report: &ContainmentReport, mut out: W) -> Result<()> {
    writeln!(
        out,
        "nx,ny,spacing,ground_energy,boundary_mass,converged,energy_sensitivity,density_sensitivity,supercritical_margin,verdict"
    )?;
    for r in &report.runs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.nx,
            r.ny,
            r.spacing,
            r.ground_energy,
            r.boundary_mass,
            r.converged,
            report.energy_sensitivity,
            report.density_sensitivity,
            report.supercritical_margin,
            report.verdict.label()
        )?;
    }
    Ok(())
}

/// Pretty-printed UTF-8 JSON.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `write`.
pub fn write_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}
