"""Smoke test for the pyrotlattice extension.

Build and install first, e.g.

    pip install maturin
    maturin develop -m crates/python/Cargo.toml

then run ``python python/smoke_test.py``.
"""

import math

import pyrotlattice as rl


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    geom = rl.LatticeGeometry(20, 20)
    assert geom.num_sites == 400
    close(geom.spacing, rl.UNIT_MASS_SPACING, 1e-15)

    # lattice and continuum differ by 4t on the diagonal at d = h = 1/sqrt(2)
    lattice = rl.Hamiltonian(geom, model="hubbard", omega=0.1, bigomega=0.09)
    continuum = rl.Hamiltonian(geom, model="continuum", omega=0.1, bigomega=0.09)
    assert lattice.max_abs_difference(continuum, shift=-4.0) < 1e-14
    assert lattice.hermiticity_defect() == 0.0

    free = rl.Hamiltonian(rl.LatticeGeometry(2, 2, 1.0), omega=0.0)
    for got, want in zip(free.dense().eigenvalues, [-2.0, 0.0, 0.0, 2.0]):
        close(got, want, 1e-12)

    trapped = rl.Hamiltonian(geom, omega=0.6, bigomega=0.2)
    sol = trapped.solve(6)
    dense = trapped.dense()
    for a, b in zip(sol.eigenvalues, dense.eigenvalues):
        close(a, b, 1e-9 * trapped.norm_one())
    assert sol.converged

    rho = sol.multiplet_density(0)
    close(rho.total(), 1.0, 1e-12)
    assert rho.boundary_mass(3) < 1e-6
    assert rho.quarter_turn_asymmetry() < 1e-8
    coords, values = rho.cross_section("y", 0.0)
    assert len(coords) == 20 and max(values) > 0

    inflow = trapped.net_inflow(sol.eigenvector(1))
    assert max(abs(v) for v in inflow) < 1e-9

    levels = rl.analytic_levels(0.1, 0.09, 4)
    assert [round(e, 6) for _, _, e in levels] == [0.1, 0.11, 0.12, 0.13]
    close(rl.richardson_extrapolate([0.5, 0.25], [1.25, 1.0625]), 1.0, 1e-12)

    rows = rl.omega_sweep(geom, "hubbard", 0.6, [0.0, 0.2])
    assert [r["verdict"] for r in rows] == ["contained", "contained"]
    report = rl.refinement_scan("hubbard", 0.6, 0.1, sizes=[(20, 20), (24, 24)])
    assert report["verdict"] == "contained", report
    assert not math.isnan(report["energy_sensitivity"])

    print("pyrotlattice smoke test passed")


if __name__ == "__main__":
    main()
