//! Rotating atoms in a harmonically trapped two-dimensional lattice.
//!
//! The crate builds two single-particle Hamiltonians in the rotating frame, a
//! tight-binding lattice and a finite-difference continuum, finds their lowest
//! eigenpairs, and derives densities, bond currents, filled-Fermi-sea densities and a
//! containment diagnostic telling trapped ground states from ones that escape to the
//! edge of the grid.

pub mod diagnostics;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod io;
pub mod observables;
pub mod sparse;

pub use diagnostics::{
    escape_threshold, omega_sweep, refinement_scan, richardson_extrapolate, ContainmentReport, ScanAxis, ScanConfig,
    Thresholds, Verdict,
};
pub use eigensolver::{cluster_multiplets, dense_oracle, solve_lowest, EigenSolution, SolverOptions};
pub use error::{Error, Result};
pub use geometry::{Bond, Direction, LatticeGeometry, Site};
pub use hamiltonian::{
    analytic_spectrum, build, build_discretized_continuum, build_hubbard, effective_mass, ModelKind, ModelParams,
    RotationCoupling,
};
pub use sparse::SparseHermitianMatrix;
