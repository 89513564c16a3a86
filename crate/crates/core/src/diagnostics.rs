//! Containment diagnostics: refinement scans, rotation sweeps and escape thresholds.
//!
//! A ground state is *contained* when it does not feel the edge of the grid: its
//! energy and density are unchanged under mesh refinement or a larger lattice, and
//! almost none of its weight sits next to the boundary.

use serde::{Deserialize, Serialize};

use crate::eigensolver::{solve_lowest, EigenSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::LatticeGeometry;
use crate::hamiltonian::{build, ModelParams};
use crate::observables::{boundary_mass, multiplet_average_density, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Largest tolerated spread of ground energies across runs.
    pub energy: f64,
    /// Largest tolerated L¹ distance between normalized ground densities.
    pub density: f64,
    /// Largest tolerated weight within `margin` sites of the edge.
    pub boundary: f64,
    pub margin: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { energy: 1e-4, density: 1e-3, boundary: 1e-6, margin: 3 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("eps_e", self.energy), ("eps_rho", self.density), ("eps_b", self.boundary)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(field, format!("must be non-negative, got {v}")));
            }
        }
        if self.margin == 0 {
            return Err(Error::param("margin", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Contained,
    Escaping,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Contained => "contained",
            Verdict::Escaping => "escaping",
        }
    }
}

/// What a refinement scan varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    /// Grid spacings at a fixed physical side length.
    Mesh { extent: f64, spacings: Vec<f64> },
    /// Grid sizes at a fixed spacing.
    LatticeSize { spacing: f64, sizes: Vec<(usize, usize)> },
}

impl ScanAxis {
    pub fn geometries(&self) -> Result<Vec<LatticeGeometry>> {
        let geoms = match self {
            ScanAxis::Mesh { extent, spacings } => spacings
                .iter()
                .map(|&h| LatticeGeometry::with_extent(*extent, h))
                .collect::<Result<Vec<_>>>()?,
            ScanAxis::LatticeSize { spacing, sizes } => sizes
                .iter()
                .map(|&(nx, ny)| LatticeGeometry::new(nx, ny, *spacing))
                .collect::<Result<Vec<_>>>()?,
        };
        if geoms.len() < 2 {
            return Err(Error::param("levels", "a refinement scan needs at least two levels"));
        }
        Ok(geoms)
    }
}

/// Everything except the grid needed to solve one problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub params: ModelParams,
    pub n_states: usize,
    pub solver: SolverOptions,
    pub thresholds: Thresholds,
}

impl ScanConfig {
    pub fn new(params: ModelParams) -> Self {
        ScanConfig { params, n_states: 4, solver: SolverOptions::default(), thresholds: Thresholds::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.solver.validate()?;
        self.thresholds.validate()?;
        if self.n_states == 0 {
            return Err(Error::param("n_states", "must be at least 1"));
        }
        Ok(())
    }

    /// Solves on `geom`. A solver that runs out of restarts still yields its partial
    /// solution, with `diagnostics.converged` false.
    pub fn solve(&self, geom: &LatticeGeometry) -> Result<EigenSolution> {
        let matrix = build(geom, &self.params)?;
        match solve_lowest(&matrix, self.n_states.min(geom.num_sites()), &self.solver) {
            Err(Error::NotConverged { partial, .. }) => Ok(*partial),
            other => other,
        }
    }
}

/// One level of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRun {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub ground_energy: f64,
    pub boundary_mass: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub runs: Vec<LevelRun>,
    /// Largest pairwise `|ΔE_g|`.
    pub energy_sensitivity: f64,
    /// Largest pairwise L¹ distance of the ground densities on the common window.
    pub density_sensitivity: f64,
    /// `√(Ω² - ω²)` above the centrifugal limit, else zero.
    pub supercritical_margin: f64,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
}

impl ContainmentReport {
    /// Builds a report from already solved levels.
    pub fn assess(
        params: &ModelParams,
        levels: &[(LatticeGeometry, &EigenSolution)],
        thresholds: Thresholds,
    ) -> Result<Self> {
        thresholds.validate()?;
        if levels.len() < 2 {
            return Err(Error::param("levels", "a refinement scan needs at least two levels"));
        }
        let mut runs = Vec::with_capacity(levels.len());
        let mut densities = Vec::with_capacity(levels.len());
        for (geom, sol) in levels {
            let rho = ground_density(geom, sol)?;
            runs.push(LevelRun {
                nx: geom.nx(),
                ny: geom.ny(),
                spacing: geom.spacing(),
                ground_energy: sol.ground_energy(),
                boundary_mass: boundary_mass(&rho, thresholds.margin)?,
                converged: sol.diagnostics.converged,
            });
            densities.push(rho);
        }
        let energies: Vec<f64> = runs.iter().map(|r| r.ground_energy).collect();
        let energy_sensitivity = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - energies.iter().copied().fold(f64::INFINITY, f64::min);
        let samples = common_window_samples(&densities)?;
        let mut density_sensitivity: f64 = 0.0;
        for i in 0..samples.len() {
            for j in 0..i {
                let d = samples[i].iter().zip(&samples[j]).map(|(a, b)| (a - b).abs()).sum::<f64>();
                density_sensitivity = density_sensitivity.max(d);
            }
        }
        let trapped = energy_sensitivity <= thresholds.energy
            && density_sensitivity <= thresholds.density
            && runs.iter().all(|r| r.boundary_mass <= thresholds.boundary);
        Ok(ContainmentReport {
            runs,
            energy_sensitivity,
            density_sensitivity,
            supercritical_margin: params.supercritical_margin(),
            thresholds,
            verdict: if trapped { Verdict::Contained } else { Verdict::Escaping },
        })
    }

    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

/// Multiplet-averaged density of the ground level.
pub fn ground_density(geom: &LatticeGeometry, solution: &EigenSolution) -> Result<ScalarField> {
    if solution.is_empty() {
        return Err(Error::InsufficientStates { needed: 1, available: 0 });
    }
    multiplet_average_density(geom, solution, solution.ground_multiplet())
}

/// Bilinear interpolation of a per-site probability into a probability density per
/// unit area at physical `(x, y)`; `None` outside the grid.
fn sample_density(field: &ScalarField, x: f64, y: f64) -> Option<f64> {
    let g = &field.geometry;
    let h = g.spacing();
    let (cx, cy) = g.center();
    let (u, v) = ((x + cx) / h, (y + cy) / h);
    let (umax, vmax) = ((g.nx() - 1) as f64, (g.ny() - 1) as f64);
    const SLACK: f64 = 1e-9;
    if u < -SLACK || v < -SLACK || u > umax + SLACK || v > vmax + SLACK {
        return None;
    }
    let (u, v) = (u.clamp(0.0, umax), v.clamp(0.0, vmax));
    let i0 = (u.floor() as usize).min(g.nx() - 2);
    let j0 = (v.floor() as usize).min(g.ny() - 2);
    let (fu, fv) = (u - i0 as f64, v - j0 as f64);
    let at = |i: usize, j: usize| field.values[j * g.nx() + i];
    let value = (1.0 - fu) * (1.0 - fv) * at(i0, j0)
        + fu * (1.0 - fv) * at(i0 + 1, j0)
        + (1.0 - fu) * fv * at(i0, j0 + 1)
        + fu * fv * at(i0 + 1, j0 + 1);
    Some(value / (h * h))
}

/// Resamples every field onto the sites of the coarsest grid that lie inside all
/// grids, then normalizes each sample vector to unit sum.
fn common_window_samples(fields: &[ScalarField]) -> Result<Vec<Vec<f64>>> {
    let bounds = |f: &ScalarField| {
        let g = &f.geometry;
        let (cx, cy) = g.center();
        let h = g.spacing();
        (-cx, -cy, (g.nx() - 1) as f64 * h - cx, (g.ny() - 1) as f64 * h - cy)
    };
    let (mut x0, mut y0, mut x1, mut y1) = bounds(&fields[0]);
    for f in &fields[1..] {
        let (a, b, c, d) = bounds(f);
        x0 = x0.max(a);
        y0 = y0.max(b);
        x1 = x1.min(c);
        y1 = y1.min(d);
    }
    let coarse = fields
        .iter()
        .max_by(|a, b| a.geometry.spacing().total_cmp(&b.geometry.spacing()))
        .expect("at least two fields");
    let g = &coarse.geometry;
    let tol = 1e-9 * g.spacing();
    let points: Vec<(f64, f64)> = (0..g.num_sites())
        .map(|p| g.coords(p))
        .filter(|&(x, y)| x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol)
        .collect();
    if points.is_empty() {
        return Err(Error::Diagnostics("grids share no common window".into()));
    }
    fields
        .iter()
        .map(|f| {
            let mut s: Vec<f64> = points
                .iter()
                .map(|&(x, y)| sample_density(f, x, y).expect("point inside every grid"))
                .collect();
            let total: f64 = s.iter().sum();
            if total > 0.0 {
                s.iter_mut().for_each(|v| *v /= total);
            }
            Ok(s)
        })
        .collect()
}

/// Solves every level of `axis` and compares them. If any level fails to converge the
/// error carries the full report built from partial solutions, with those runs flagged.
pub fn refinement_scan(config: &ScanConfig, axis: &ScanAxis) -> Result<ContainmentReport> {
    config.validate()?;
    let geoms = axis.geometries()?;
    let solutions = geoms.iter().map(|g| config.solve(g)).collect::<Result<Vec<_>>>()?;
    let levels: Vec<(LatticeGeometry, &EigenSolution)> = geoms.iter().copied().zip(&solutions).collect();
    let report = ContainmentReport::assess(&config.params, &levels, config.thresholds)?;
    if report.all_converged() {
        Ok(report)
    } else {
        Err(Error::PartialReport(Box::new(report)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub bigomega: f64,
    pub ground_energy: f64,
    /// Ground energy measured from the bottom of the free band (`E_g + 4t` on the
    /// lattice, unchanged for the continuum).
    pub shifted_energy: f64,
    pub boundary_mass: f64,
    pub verdict: Verdict,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// First row that is contained although an earlier row already escaped.
    pub fn monotonicity_violation(&self) -> Option<usize> {
        let first_escape = self.rows.iter().position(|r| r.verdict == Verdict::Escaping)?;
        self.rows[first_escape..]
            .iter()
            .position(|r| r.verdict == Verdict::Contained)
            .map(|k| k + first_escape)
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Boundary-mass verdict on a single grid.
pub fn boundary_verdict(config: &ScanConfig, geom: &LatticeGeometry, solution: &EigenSolution) -> Result<(f64, Verdict)> {
    let mass = boundary_mass(&ground_density(geom, solution)?, config.thresholds.margin)?;
    let verdict = if mass <= config.thresholds.boundary { Verdict::Contained } else { Verdict::Escaping };
    Ok((mass, verdict))
}

fn sweep_point(config: &ScanConfig, geom: &LatticeGeometry, bigomega: f64) -> Result<SweepRow> {
    let point = ScanConfig { params: config.params.with_bigomega(bigomega), ..*config };
    point.validate()?;
    let sol = point.solve(geom)?;
    let (boundary_mass, verdict) = boundary_verdict(&point, geom, &sol)?;
    Ok(SweepRow {
        bigomega,
        ground_energy: sol.ground_energy(),
        shifted_energy: sol.ground_energy() - point.params.band_bottom(),
        boundary_mass,
        verdict,
        converged: sol.diagnostics.converged,
    })
}

/// Ground energy and boundary-mass verdict for each rotation frequency, which must be
/// ascending.
pub fn omega_sweep(config: &ScanConfig, geom: &LatticeGeometry, bigomegas: &[f64]) -> Result<SweepTable> {
    config.validate()?;
    if bigomegas.is_empty() {
        return Err(Error::param("bigomega", "sweep needs at least one value"));
    }
    if bigomegas.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::param("bigomega", "sweep values must be strictly ascending"));
    }
    let rows = bigomegas.iter().map(|&om| sweep_point(config, geom, om)).collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeThreshold {
    /// Largest frequency found contained.
    pub lower: f64,
    /// Smallest frequency found escaping; the reported threshold.
    pub upper: f64,
    pub evaluations: Vec<SweepRow>,
}

impl EscapeThreshold {
    pub fn threshold(&self) -> f64 {
        self.upper
    }
}

/// Bisects the boundary-mass verdict on a fixed grid until the bracket is narrower
/// than `tol`.
pub fn escape_threshold(
    config: &ScanConfig,
    geom: &LatticeGeometry,
    bracket: (f64, f64),
    tol: f64,
) -> Result<EscapeThreshold> {
    config.validate()?;
    let (mut lo, mut hi) = bracket;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::param("bracket", format!("need lo < hi, got ({lo}, {hi})")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let mut evaluations = Vec::new();
    let lo_row = sweep_point(config, geom, lo)?;
    let hi_row = sweep_point(config, geom, hi)?;
    let straddles = lo_row.verdict == Verdict::Contained && hi_row.verdict == Verdict::Escaping;
    evaluations.push(lo_row);
    evaluations.push(hi_row);
    if !straddles {
        return Err(Error::Diagnostics(format!(
            "bracket ({lo}, {hi}) does not straddle the escape threshold: verdicts {} and {}",
            evaluations[0].verdict.label(),
            evaluations[1].verdict.label()
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let row = sweep_point(config, geom, mid)?;
        match row.verdict {
            Verdict::Contained => lo = mid,
            Verdict::Escaping => hi = mid,
        }
        evaluations.push(row);
    }
    Ok(EscapeThreshold { lower: lo, upper: hi, evaluations })
}

/// Extrapolates `values` measured at grid spacings `spacings` to zero spacing,
/// assuming an even power series in the spacing (exact polynomial fit in `h²`).
pub fn richardson_extrapolate(spacings: &[f64], values: &[f64]) -> Result<f64> {
    if spacings.len() != values.len() || spacings.len() < 2 {
        return Err(Error::param("levels", "need at least two (spacing, value) pairs"));
    }
    let x: Vec<f64> = spacings.iter().map(|h| h * h).collect();
    for i in 0..x.len() {
        for j in 0..i {
            if (x[i] - x[j]).abs() < 1e-14 {
                return Err(Error::param("levels", "spacings must be distinct"));
            }
        }
    }
    // Neville's scheme evaluated at x = 0
    let mut p = values.to_vec();
    for k in 1..x.len() {
        for i in 0..x.len() - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    Ok(p[0])
}
