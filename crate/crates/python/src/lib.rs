//! Python bindings: `import pyrotlattice`.
//!
//! Geometry, Hamiltonian assembly, the eigensolver, observables and the containment
//! diagnostics. Diagnostic reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rotlattice::diagnostics::{self, ScanAxis, ScanConfig, Thresholds};
use rotlattice::hamiltonian::{self, analytic_levels};
use rotlattice::observables::{self, Axis, ScalarField};
use rotlattice::{EigenSolution, Error, LatticeGeometry, ModelKind, ModelParams, SolverOptions, SparseHermitianMatrix};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } | Error::PartialReport(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "LatticeGeometry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry {
    inner: LatticeGeometry,
}

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (nx, ny, spacing=hamiltonian::UNIT_MASS_SPACING))]
    fn new(nx: usize, ny: usize, spacing: f64) -> PyResult<Self> {
        Ok(PyGeometry { inner: LatticeGeometry::new(nx, ny, spacing).map_err(to_py)? })
    }

    /// Square grid covering a physical side length.
    #[staticmethod]
    fn with_extent(extent: f64, spacing: f64) -> PyResult<Self> {
        Ok(PyGeometry { inner: LatticeGeometry::with_extent(extent, spacing).map_err(to_py)? })
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx()
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.inner.num_sites()
    }

    fn index(&self, ix: usize, iy: usize) -> PyResult<usize> {
        self.inner.index(rotlattice::Site::new(ix, iy)).map_err(to_py)
    }

    fn coords(&self, p: usize) -> PyResult<(f64, f64)> {
        if p >= self.inner.num_sites() {
            return Err(PyValueError::new_err(format!("site index {p} out of range")));
        }
        Ok(self.inner.coords(p))
    }

    fn rotation_factor_k(&self, p: usize, q: usize) -> PyResult<f64> {
        self.inner.rotation_factor_k(p, q).map_err(to_py)
    }

    /// `(from, to, direction)` for every bond.
    fn bonds(&self) -> Vec<(usize, usize, &'static str)> {
        self.inner.bonds().into_iter().map(|b| (b.from, b.to, b.direction.label())).collect()
    }

    fn __repr__(&self) -> String {
        format!("LatticeGeometry({}, {}, spacing={})", self.inner.nx(), self.inner.ny(), self.inner.spacing())
    }
}

fn parse_params(model: &str, t: f64, omega: f64, bigomega: f64, coupling: &str) -> PyResult<ModelParams> {
    let kind: ModelKind = model.parse().map_err(to_py)?;
    let params = ModelParams { kind, t, omega, bigomega, coupling: coupling.parse().map_err(to_py)? };
    params.validate().map_err(to_py)?;
    Ok(params)
}

/// A Hamiltonian together with the grid and parameters it was built from.
#[pyclass(name = "Hamiltonian", frozen)]
struct PyHamiltonian {
    geometry: LatticeGeometry,
    params: ModelParams,
    matrix: SparseHermitianMatrix,
}

#[pymethods]
impl PyHamiltonian {
    #[new]
    #[pyo3(signature = (geometry, model="hubbard", omega=0.1, bigomega=0.0, t=1.0, coupling="lz-matched"))]
    fn new(geometry: &PyGeometry, model: &str, omega: f64, bigomega: f64, t: f64, coupling: &str) -> PyResult<Self> {
        let params = parse_params(model, t, omega, bigomega, coupling)?;
        let matrix = hamiltonian::build(&geometry.inner, &params).map_err(to_py)?;
        Ok(PyHamiltonian { geometry: geometry.inner, params, matrix })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    #[getter]
    fn geometry(&self) -> PyGeometry {
        PyGeometry { inner: self.geometry }
    }

    fn get(&self, row: usize, col: usize) -> PyResult<Complex64> {
        if row >= self.matrix.dim() || col >= self.matrix.dim() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.matrix.get(row, col))
    }

    /// Stored entries as `(rows, cols, values)`.
    fn triplets(&self) -> (Vec<usize>, Vec<usize>, Vec<Complex64>) {
        let mut rows = Vec::with_capacity(self.matrix.nnz());
        let mut cols = Vec::with_capacity(self.matrix.nnz());
        let mut vals = Vec::with_capacity(self.matrix.nnz());
        for r in 0..self.matrix.dim() {
            for (c, v) in self.matrix.row(r) {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        (rows, cols, vals)
    }

    fn apply(&self, x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        if x.len() != self.matrix.dim() {
            return Err(PyValueError::new_err(format!("expected {} amplitudes", self.matrix.dim())));
        }
        Ok(self.matrix.apply(&x))
    }

    fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    fn norm_one(&self) -> f64 {
        self.matrix.norm_one()
    }

    /// `max |H - other|` entrywise after adding `shift` to the diagonal of `other`.
    #[pyo3(signature = (other, shift=0.0))]
    fn max_abs_difference(&self, other: &PyHamiltonian, shift: f64) -> PyResult<f64> {
        if other.matrix.dim() != self.matrix.dim() {
            return Err(PyValueError::new_err("dimensions differ"));
        }
        Ok(self.matrix.max_abs_difference(&other.matrix.shifted(shift)))
    }

    /// Lowest `m` eigenpairs.
    #[pyo3(signature = (m, tol=rotlattice::eigensolver::DEFAULT_TOL, seed=rotlattice::eigensolver::DEFAULT_SEED))]
    fn solve(&self, py: Python<'_>, m: usize, tol: f64, seed: u64) -> PyResult<PySolution> {
        let opts = SolverOptions::default().with_tol(tol).with_seed(seed);
        let inner = py
            .detach(|| rotlattice::solve_lowest(&self.matrix, m, &opts))
            .map_err(to_py)?;
        Ok(PySolution { inner, geometry: self.geometry, params: self.params })
    }

    /// Full spectrum by dense diagonalization (small grids only).
    fn dense(&self) -> PyResult<PySolution> {
        let inner = rotlattice::dense_oracle(&self.matrix).map_err(to_py)?;
        Ok(PySolution { inner, geometry: self.geometry, params: self.params })
    }

    /// Bond currents of a state as `(from, to, direction, value)` tuples.
    fn bond_currents(&self, state: Vec<Complex64>) -> PyResult<Vec<(usize, usize, &'static str, f64)>> {
        let field = observables::bond_currents(&self.geometry, &self.params, &state).map_err(to_py)?;
        Ok(field.bonds.iter().zip(&field.values).map(|(b, &v)| (b.from, b.to, b.direction.label(), v)).collect())
    }

    /// Net current into every site for a state.
    fn net_inflow(&self, state: Vec<Complex64>) -> PyResult<Vec<f64>> {
        let field = observables::bond_currents(&self.geometry, &self.params, &state).map_err(to_py)?;
        Ok(field.net_inflow())
    }
}

#[pyclass(name = "EigenSolution", frozen)]
struct PySolution {
    inner: EigenSolution,
    geometry: LatticeGeometry,
    params: ModelParams,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.residuals.clone()
    }

    #[getter]
    fn multiplets(&self) -> Vec<(usize, usize)> {
        self.inner.multiplets.iter().map(|r| (r.start, r.end)).collect()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.diagnostics.converged
    }

    /// Eigenvalues measured from the bottom of the free band.
    #[getter]
    fn shifted_eigenvalues(&self) -> Vec<f64> {
        let shift = -self.params.band_bottom();
        self.inner.eigenvalues.iter().map(|e| e + shift).collect()
    }

    fn eigenvector(&self, i: usize) -> PyResult<Vec<Complex64>> {
        self.inner
            .eigenvectors
            .get(i)
            .cloned()
            .ok_or_else(|| PyValueError::new_err(format!("state {i} was not computed")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn density(&self, i: usize) -> PyResult<PyField> {
        let v = self.eigenvector(i)?;
        Ok(PyField { inner: observables::density(&self.geometry, &v).map_err(to_py)? })
    }

    /// Density averaged over the multiplet containing state `i`.
    #[pyo3(signature = (i=0))]
    fn multiplet_density(&self, i: usize) -> PyResult<PyField> {
        let range = self
            .inner
            .multiplet_of(i)
            .ok_or_else(|| PyValueError::new_err(format!("state {i} was not computed")))?;
        Ok(PyField { inner: observables::multiplet_average_density(&self.geometry, &self.inner, range).map_err(to_py)? })
    }

    fn fermion_density(&self, n_fermions: usize) -> PyResult<PyField> {
        Ok(PyField { inner: observables::fermion_density(&self.geometry, &self.inner, n_fermions).map_err(to_py)? })
    }
}

/// Per-site values with physical coordinates.
#[pyclass(name = "ScalarField", frozen)]
struct PyField {
    inner: ScalarField,
}

fn parse_axis(axis: &str) -> PyResult<Axis> {
    match axis {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        other => Err(PyValueError::new_err(format!("axis must be 'x' or 'y', got {other:?}"))),
    }
}

#[pymethods]
impl PyField {
    #[new]
    fn new(geometry: &PyGeometry, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyField { inner: ScalarField::new(geometry.inner, values).map_err(to_py)? })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn geometry(&self) -> PyGeometry {
        PyGeometry { inner: self.inner.geometry }
    }

    fn total(&self) -> f64 {
        self.inner.total()
    }

    fn max(&self) -> f64 {
        self.inner.max()
    }

    /// Profile along the line `axis = offset` as `(coords, values)`.
    #[pyo3(signature = (axis, offset=0.0))]
    fn cross_section(&self, axis: &str, offset: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = observables::cross_section(&self.inner, parse_axis(axis)?, offset).map_err(to_py)?;
        Ok((p.coords, p.values))
    }

    fn diagonal_profile(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = observables::diagonal_profile(&self.inner).map_err(to_py)?;
        Ok((p.coords, p.values))
    }

    #[pyo3(signature = (margin=3))]
    fn boundary_mass(&self, margin: usize) -> PyResult<f64> {
        observables::boundary_mass(&self.inner, margin).map_err(to_py)
    }

    fn quarter_turn_asymmetry(&self) -> PyResult<f64> {
        observables::quarter_turn_asymmetry(&self.inner).map_err(to_py)
    }
}

#[pyfunction]
fn analytic_spectrum(omega: f64, bigomega: f64, j: u32, k: u32) -> PyResult<f64> {
    hamiltonian::analytic_spectrum(omega, bigomega, j, k).map_err(to_py)
}

/// The `count` lowest closed-form continuum levels as `(j, k, energy)`.
#[pyfunction]
fn analytic_levels_py(omega: f64, bigomega: f64, count: usize) -> PyResult<Vec<(u32, u32, f64)>> {
    analytic_levels(omega, bigomega, count).map_err(to_py)
}

#[pyfunction]
fn richardson_extrapolate(spacings: Vec<f64>, values: Vec<f64>) -> PyResult<f64> {
    diagnostics::richardson_extrapolate(&spacings, &values).map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn scan_config(
    model: &str,
    omega: f64,
    bigomega: f64,
    t: f64,
    coupling: &str,
    n_states: usize,
    tol: f64,
    margin: usize,
) -> PyResult<ScanConfig> {
    let mut cfg = ScanConfig::new(parse_params(model, t, omega, bigomega, coupling)?);
    cfg.n_states = n_states;
    cfg.solver = cfg.solver.with_tol(tol);
    cfg.thresholds = Thresholds { margin, ..Thresholds::default() };
    Ok(cfg)
}

/// Refinement scan over mesh spacings (`spacings`, `extent`) or grid sizes (`sizes`,
/// `spacing`). Returns the containment report as a dict.
#[pyfunction]
#[pyo3(signature = (model, omega, bigomega, *, spacings=None, extent=40.0, sizes=None, spacing=hamiltonian::UNIT_MASS_SPACING, t=1.0, coupling="lz-matched", n_states=4, tol=rotlattice::eigensolver::DEFAULT_TOL, margin=3))]
#[allow(clippy::too_many_arguments)]
fn refinement_scan<'py>(
    py: Python<'py>,
    model: &str,
    omega: f64,
    bigomega: f64,
    spacings: Option<Vec<f64>>,
    extent: f64,
    sizes: Option<Vec<(usize, usize)>>,
    spacing: f64,
    t: f64,
    coupling: &str,
    n_states: usize,
    tol: f64,
    margin: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = scan_config(model, omega, bigomega, t, coupling, n_states, tol, margin)?;
    let axis = match (spacings, sizes) {
        (Some(spacings), None) => ScanAxis::Mesh { extent, spacings },
        (None, Some(sizes)) => ScanAxis::LatticeSize { spacing, sizes },
        _ => return Err(PyValueError::new_err("give exactly one of `spacings` or `sizes`")),
    };
    let report = py.detach(|| diagnostics::refinement_scan(&cfg, &axis)).map_err(to_py)?;
    json_to_py(py, &report)
}

/// Ground energy and boundary-mass verdict per rotation frequency, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (geometry, model, omega, bigomegas, *, t=1.0, coupling="lz-matched", n_states=4, tol=rotlattice::eigensolver::DEFAULT_TOL, margin=3))]
#[allow(clippy::too_many_arguments)]
fn omega_sweep<'py>(
    py: Python<'py>,
    geometry: &PyGeometry,
    model: &str,
    omega: f64,
    bigomegas: Vec<f64>,
    t: f64,
    coupling: &str,
    n_states: usize,
    tol: f64,
    margin: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = scan_config(model, omega, 0.0, t, coupling, n_states, tol, margin)?;
    let geom = geometry.inner;
    let table = py.detach(|| diagnostics::omega_sweep(&cfg, &geom, &bigomegas)).map_err(to_py)?;
    json_to_py(py, &table.rows)
}

#[pymodule]
fn pyrotlattice(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(analytic_spectrum, m)?)?;
    m.add("analytic_levels", wrap_pyfunction!(analytic_levels_py, m)?)?;
    m.add_function(wrap_pyfunction!(richardson_extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(refinement_scan, m)?)?;
    m.add_function(wrap_pyfunction!(omega_sweep, m)?)?;
    m.add("UNIT_MASS_SPACING", hamiltonian::UNIT_MASS_SPACING)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
