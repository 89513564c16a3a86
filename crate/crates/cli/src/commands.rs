use std::path::{Path, PathBuf};

use rotlattice::diagnostics::{escape_threshold, refinement_scan, ContainmentReport, SweepTable};
use rotlattice::hamiltonian::analytic_levels;
use rotlattice::observables::{
    bond_currents, boundary_mass, cross_section, density, diagonal_profile, fermion_density, lobe_current_minimum,
    multiplet_average_density, quarter_turn_asymmetry, Axis,
};
use rotlattice::{build, io, omega_sweep, solve_lowest, EigenSolution, Error, LatticeGeometry, ModelKind};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Radius of a density lobe, in units of its RMS radius.
const LOBE_RADIUS: f64 = 1.5;

pub struct Outcome {
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    converged: bool,
    outputs: Vec<String>,
    summary: Value,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    stem: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, Error> {
        std::fs::create_dir_all(&cfg.output_dir)?;
        Ok(Writer { cfg, stem: cfg.stem(), files: Vec::new() })
    }

    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.cfg.output_dir.join(format!("{}{suffix}.{ext}", self.stem))
    }

    fn csv<F>(&mut self, suffix: &str, write: F) -> Result<(), Error>
    where
        F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), Error>,
    {
        let path = self.path(suffix, "csv");
        io::write_file(&path, write)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, converged: bool, summary: Value) -> Result<Outcome, Error> {
        let sidecar = self.path("", "json");
        let outputs = self.files.iter().map(|p| file_name(p)).collect();
        let doc = Sidecar {
            command: self.cfg.command.label(),
            version: env!("CARGO_PKG_VERSION"),
            config: self.cfg,
            converged,
            outputs,
            summary,
        };
        io::write_json(&doc, &sidecar)?;
        self.files.push(sidecar);
        Ok(Outcome { converged, files: self.files })
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Lowest `m` states; a partial solution is kept when the solver runs out of restarts.
fn solve(cfg: &RunConfig, geom: &LatticeGeometry, m: usize) -> Result<EigenSolution, Error> {
    let matrix = build(geom, &cfg.params())?;
    match solve_lowest(&matrix, m, &cfg.solver()) {
        Err(Error::NotConverged { partial, worst, target, .. }) => {
            eprintln!("warning: eigensolver stopped at residual {worst:e} (target {target:e})");
            Ok(*partial)
        }
        other => other,
    }
}

/// Solves until the multiplet containing state `index` is followed by at least one
/// further computed state, so that it cannot be cut off.
fn solve_resolving(cfg: &RunConfig, geom: &LatticeGeometry, index: usize) -> Result<EigenSolution, Error> {
    let sites = geom.num_sites();
    let mut m = cfg.n_states.max(index + 2).min(sites);
    loop {
        let sol = solve(cfg, geom, m)?;
        let end = sol.multiplet_of(index).map(|r| r.end).unwrap_or(m);
        if end < sol.len() || m == sites {
            return Ok(sol);
        }
        m = (m + 8).min(sites);
    }
}

fn shift(cfg: &RunConfig) -> f64 {
    -cfg.params().band_bottom()
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, Error> {
    let geom = cfg.geometry();
    let sol = solve(cfg, &geom, cfg.n_states)?;
    let labels = match cfg.model {
        ModelKind::DiscretizedContinuum if cfg.bigomega <= cfg.omega => Some(analytic_levels(cfg.omega, cfg.bigomega, sol.len())?),
        _ => None,
    };
    let shift = shift(cfg);
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_spectrum(&sol, shift, labels.as_deref(), out))?;
    let summary = json!({
        "eigenvalues": sol.eigenvalues,
        "shifted_eigenvalues": sol.eigenvalues.iter().map(|e| e + shift).collect::<Vec<_>>(),
        "residuals": sol.residuals,
        "multiplets": sol.multiplets.iter().map(|r| [r.start, r.end]).collect::<Vec<_>>(),
        "analytic": labels,
        "solver": sol.diagnostics,
    });
    w.finish(sol.diagnostics.converged, summary)
}

pub fn density_cmd(cfg: &RunConfig) -> Result<Outcome, Error> {
    let geom = cfg.geometry();
    let sol = solve_resolving(cfg, &geom, cfg.state)?;
    let multiplet = sol.multiplet_of(cfg.state).expect("state was computed");
    let field = multiplet_average_density(&geom, &sol, multiplet.clone())?;
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_scalar_field(&field, out))?;
    let xsec_x = cross_section(&field, Axis::X, 0.0)?;
    let xsec_y = cross_section(&field, Axis::Y, 0.0)?;
    w.csv("_x0", |out| io::write_profile(&xsec_x, out))?;
    w.csv("_y0", |out| io::write_profile(&xsec_y, out))?;
    let diagonal = diagonal_profile(&field).ok();
    if let Some(d) = &diagonal {
        w.csv("_diag", |out| io::write_profile(d, out))?;
    }
    if cfg.members {
        for i in multiplet.clone() {
            let member = density(&geom, &sol.eigenvectors[i])?;
            w.csv(&format!("_member{i}"), |out| io::write_scalar_field(&member, out))?;
        }
    }
    let peak = field.argmax();
    let summary = json!({
        "multiplet": [multiplet.start, multiplet.end],
        "energies": &sol.eigenvalues[multiplet.clone()],
        "shifted_energies": sol.eigenvalues[multiplet].iter().map(|e| e + shift(cfg)).collect::<Vec<_>>(),
        "boundary_mass": boundary_mass(&field, cfg.thresholds.margin)?,
        "quarter_turn_asymmetry": quarter_turn_asymmetry(&field).ok(),
        "max_density": field.max(),
        "peak_position": geom.coords(peak),
        "cross_section_max": {"x0": xsec_x.max(), "y0": xsec_y.max()},
        "solver": sol.diagnostics,
    });
    w.finish(sol.diagnostics.converged, summary)
}

pub fn currents(cfg: &RunConfig) -> Result<Outcome, Error> {
    let geom = cfg.geometry();
    let sol = solve(cfg, &geom, cfg.n_states)?;
    let state = &sol.eigenvectors[cfg.state];
    let field = bond_currents(&geom, &cfg.params(), state)?;
    let inflow = field.net_inflow();
    let max_residual = inflow.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_bond_field(&field, Some(&inflow), out))?;
    let rho = density(&geom, state)?;
    let lobe = lobe_current_minimum(&rho, &field, LOBE_RADIUS).ok().map(|m| {
        json!({
            "position": geom.coords(m.site),
            "current": m.current,
            "density_ratio": m.density_ratio(),
            "max_current_in_lobe": m.max_current,
        })
    });
    let summary = json!({
        "energy": sol.eigenvalues[cfg.state],
        "max_continuity_residual": max_residual,
        "max_current": field.values.iter().fold(0.0f64, |a, b| a.max(b.abs())),
        "lobe_minimum": lobe,
        "solver": sol.diagnostics,
    });
    w.finish(sol.diagnostics.converged, summary)
}

pub fn fermions(cfg: &RunConfig) -> Result<Outcome, Error> {
    let geom = cfg.geometry();
    let n = cfg.n_fermions.expect("resolved for fermions");
    let sites = geom.num_sites();
    let mut m = cfg.n_states.max(n).min(sites);
    let (sol, field) = loop {
        let sol = solve(cfg, &geom, m)?;
        match fermion_density(&geom, &sol, n) {
            Ok(field) => break (sol, field),
            Err(Error::InsufficientStates { .. }) if m < sites => m = (m + 8).min(sites),
            Err(e) => return Err(e),
        }
    };
    let profile = cross_section(&field, Axis::Y, 0.0)?;
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_scalar_field(&field, out))?;
    w.csv("_y0", |out| io::write_profile(&profile, out))?;
    let summary = json!({
        "n_fermions": n,
        "states_computed": sol.len(),
        "fermi_energy": sol.eigenvalues[n - 1],
        "total": field.total(),
        "y0_center": profile.center_value(),
        "y0_max": profile.max(),
        "boundary_mass": boundary_mass(&field, cfg.thresholds.margin)?,
        "solver": sol.diagnostics,
    });
    w.finish(sol.diagnostics.converged, summary)
}

pub fn contain(cfg: &RunConfig) -> Result<Outcome, Error> {
    let scan_cfg = cfg.scan_config();
    if let (Some(bracket), Some(tol)) = (cfg.bracket, cfg.bisect_tol) {
        let geom = cfg.geometry();
        let found = escape_threshold(&scan_cfg, &geom, bracket, tol)?;
        let table = SweepTable { rows: found.evaluations.clone() };
        let mut w = Writer::new(cfg)?;
        w.csv("", |out| io::write_sweep(&table, out))?;
        let summary = json!({
            "threshold": found.threshold(),
            "lower": found.lower,
            "upper": found.upper,
        });
        return w.finish(table.all_converged(), summary);
    }
    let axis = cfg.scan.as_ref().expect("resolved for contain");
    let (report, converged) = match refinement_scan(&scan_cfg, axis) {
        Ok(r) => (r, true),
        Err(Error::PartialReport(r)) => {
            eprintln!("warning: some scan levels did not converge");
            (*r, false)
        }
        Err(e) => return Err(e),
    };
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_report(&report, out))?;
    w.finish(converged, report_summary(&report))
}

fn report_summary(report: &ContainmentReport) -> Value {
    serde_json::to_value(report).unwrap_or(Value::Null)
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, Error> {
    let geom = cfg.geometry();
    let list = cfg.bigomegas.as_ref().expect("resolved for sweep");
    let table = omega_sweep(&cfg.scan_config(), &geom, list)?;
    let violation = table.monotonicity_violation();
    if let Some(i) = violation {
        eprintln!("warning: verdict returns to contained at bigomega = {}", table.rows[i].bigomega);
    }
    let mut w = Writer::new(cfg)?;
    w.csv("", |out| io::write_sweep(&table, out))?;
    let summary = json!({ "rows": table.rows, "monotonicity_violation": violation });
    w.finish(table.all_converged(), summary)
}
