use rotlattice::hamiltonian::{effective_mass, UNIT_MASS_SPACING};
use rotlattice::{build, solve_lowest, LatticeGeometry, ModelParams, SolverOptions};

#[test]
fn shifted_lattice_energies_match_continuum() {
    let g = LatticeGeometry::new(30, 30, UNIT_MASS_SPACING).unwrap();
    let lattice = ModelParams::hubbard(1.0, 0.3, 0.1);
    let continuum = ModelParams::continuum(0.3, 0.1);
    let a = solve_lowest(&build(&g, &lattice).unwrap(), 6, &SolverOptions::default()).unwrap();
    let b = solve_lowest(&build(&g, &continuum).unwrap(), 6, &SolverOptions::default()).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - lattice.band_bottom() - y).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn unit_mass_spacing_gives_unit_mass_at_band_bottom() {
    assert!((effective_mass(1.0, UNIT_MASS_SPACING, 0.0).unwrap() - 1.0).abs() < 1e-14);
    let top = std::f64::consts::PI / UNIT_MASS_SPACING;
    assert!((effective_mass(1.0, UNIT_MASS_SPACING, top).unwrap() + 1.0).abs() < 1e-12);
}
