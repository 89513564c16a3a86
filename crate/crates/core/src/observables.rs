//! Physical outputs derived from eigenpairs.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::geometry::{Bond, Direction, LatticeGeometry, Site};
use crate::hamiltonian::{hopping_amplitude, ModelParams};

/// Per-site real values, e.g. probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub geometry: LatticeGeometry,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(geometry: LatticeGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.num_sites() {
            return Err(Error::Observable(format!(
                "field has {} values for {} sites",
                values.len(),
                geometry.num_sites()
            )));
        }
        Ok(ScalarField { geometry, values })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn at(&self, site: Site) -> Result<f64> {
        Ok(self.values[self.geometry.index(site)?])
    }
}

/// Currents on the bonds of a grid, stored once per bond in its `+x`/`+y` orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondField {
    pub geometry: LatticeGeometry,
    pub bonds: Vec<Bond>,
    /// Current from `bond.from` to `bond.to`.
    pub values: Vec<f64>,
}

impl BondField {
    /// Current `p -> q`, antisymmetric in its arguments.
    pub fn current(&self, p: usize, q: usize) -> Result<f64> {
        if !self.geometry.are_neighbors(p, q) {
            return Err(Error::NotNeighbors(p, q));
        }
        let (from, to) = (p.min(q), p.max(q));
        let direction = if to - from == 1 { Direction::PlusX } else { Direction::PlusY };
        let k = self.bond_index(from, direction);
        debug_assert_eq!(self.bonds[k].to, to);
        Ok(if p == from { self.values[k] } else { -self.values[k] })
    }

    fn bond_index(&self, from: usize, direction: Direction) -> usize {
        // bonds() emits, per site in row-major order, the +x bond then the +y bond
        let g = &self.geometry;
        let Site { ix, iy } = g.site(from);
        let per_full_row = 2 * g.nx() - 1;
        let before_row = if iy + 1 < g.ny() {
            iy * per_full_row
        } else {
            (g.ny() - 1) * per_full_row
        };
        let within = if iy + 1 < g.ny() {
            2 * ix + usize::from(direction == Direction::PlusY && ix + 1 < g.nx())
        } else {
            ix
        };
        before_row + within
    }

    /// `Σ_q J(q -> p)` for every site; zero for a stationary state.
    pub fn net_inflow(&self) -> Vec<f64> {
        let mut inflow = vec![0.0; self.geometry.num_sites()];
        for (b, &j) in self.bonds.iter().zip(&self.values) {
            inflow[b.to] += j;
            inflow[b.from] -= j;
        }
        inflow
    }

    /// Site-centred current vector: each component averages the two incident bonds
    /// along that axis (one at the edges).
    pub fn site_vectors(&self) -> Vec<(f64, f64)> {
        let n = self.geometry.num_sites();
        let mut sum = vec![(0.0, 0.0); n];
        let mut count = vec![(0u8, 0u8); n];
        for (b, &j) in self.bonds.iter().zip(&self.values) {
            for p in [b.from, b.to] {
                match b.direction {
                    Direction::PlusX => {
                        sum[p].0 += j;
                        count[p].0 += 1;
                    }
                    Direction::PlusY => {
                        sum[p].1 += j;
                        count[p].1 += 1;
                    }
                }
            }
        }
        sum.into_iter()
            .zip(count)
            .map(|((sx, sy), (cx, cy))| (sx / f64::from(cx.max(1)), sy / f64::from(cy.max(1))))
            .collect()
    }

    pub fn site_magnitudes(&self) -> Vec<f64> {
        self.site_vectors().into_iter().map(|(x, y)| x.hypot(y)).collect()
    }
}

fn check_state(geom: &LatticeGeometry, state: &[Complex64]) -> Result<()> {
    if state.len() != geom.num_sites() {
        return Err(Error::Observable(format!(
            "state has {} amplitudes for {} sites",
            state.len(),
            geom.num_sites()
        )));
    }
    Ok(())
}

/// `|ψ_p|²` per site.
pub fn density(geom: &LatticeGeometry, state: &[Complex64]) -> Result<ScalarField> {
    check_state(geom, state)?;
    ScalarField::new(*geom, state.iter().map(|a| a.norm_sqr()).collect())
}

/// Mean density over a multiplet; independent of the basis chosen inside it.
pub fn multiplet_average_density(
    geom: &LatticeGeometry,
    solution: &EigenSolution,
    cluster: Range<usize>,
) -> Result<ScalarField> {
    if cluster.is_empty() {
        return Err(Error::EmptyMultiplet);
    }
    if cluster.end > solution.len() {
        return Err(Error::InsufficientStates { needed: cluster.end, available: solution.len() });
    }
    let weight = 1.0 / cluster.len() as f64;
    let mut values = vec![0.0; geom.num_sites()];
    for state in &solution.eigenvectors[cluster] {
        check_state(geom, state)?;
        for (v, a) in values.iter_mut().zip(state) {
            *v += weight * a.norm_sqr();
        }
    }
    ScalarField::new(*geom, values)
}

/// Probability current on every bond, `J(p -> q) = -2 Im(H_pq ψ_p* ψ_q)`.
///
/// For the lattice with the default coupling this reads
/// `J(p -> q) = 2t Im(ψ_p* ψ_q) - Ω K_pq Re(ψ_p* ψ_q)`; the term proportional to `K_pq`
/// is required for the currents of an eigenstate to balance at every site.
pub fn bond_currents(geom: &LatticeGeometry, params: &ModelParams, state: &[Complex64]) -> Result<BondField> {
    check_state(geom, state)?;
    params.validate()?;
    let bonds = geom.bonds();
    let values = bonds
        .iter()
        .map(|b| {
            let z = state[b.from].conj() * state[b.to];
            -2.0 * (hopping_amplitude(geom, params, b.from, b.to) * z).im
        })
        .collect();
    Ok(BondField { geometry: *geom, bonds, values })
}

/// Ground-state density of `n_fermions` non-interacting spinless fermions: the lowest
/// orbitals are filled in order; a partially filled multiplet of size `g` holding `s`
/// particles contributes `s/g` of each member's density.
pub fn fermion_density(geom: &LatticeGeometry, solution: &EigenSolution, n_fermions: usize) -> Result<ScalarField> {
    if n_fermions == 0 {
        return ScalarField::new(*geom, vec![0.0; geom.num_sites()]);
    }
    let available = solution.len();
    if n_fermions > available {
        return Err(Error::InsufficientStates { needed: n_fermions, available });
    }
    let complete = available == geom.num_sites();
    let mut values = vec![0.0; geom.num_sites()];
    let mut placed = 0;
    for cluster in &solution.multiplets {
        if placed == n_fermions {
            break;
        }
        // the last computed multiplet may be cut off by the solver
        if cluster.end == available && !complete && placed + cluster.len() >= n_fermions {
            return Err(Error::InsufficientStates { needed: cluster.end + 1, available });
        }
        let take = cluster.len().min(n_fermions - placed);
        let weight = take as f64 / cluster.len() as f64;
        for state in &solution.eigenvectors[cluster.clone()] {
            check_state(geom, state)?;
            for (v, a) in values.iter_mut().zip(state) {
                *v += weight * a.norm_sqr();
            }
        }
        placed += take;
    }
    ScalarField::new(*geom, values)
}

/// Which coordinate a cross-section holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// The line `x = offset`; the profile runs along y.
    X,
    /// The line `y = offset`; the profile runs along x.
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// Physical coordinate along the line.
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value at the point of the line closest to coordinate 0 (mean of the two
    /// nearest points when the origin falls between them).
    pub fn center_value(&self) -> f64 {
        let mut idx: Vec<usize> = (0..self.coords.len()).collect();
        idx.sort_by(|&a, &b| self.coords[a].abs().total_cmp(&self.coords[b].abs()));
        let (a, b) = (idx[0], idx[1]);
        if (self.coords[a].abs() - self.coords[b].abs()).abs() < 1e-9 {
            0.5 * (self.values[a] + self.values[b])
        } else {
            self.values[a]
        }
    }
}

/// Values along the grid line `x = offset` or `y = offset` (physical units). Offsets
/// between grid lines interpolate linearly between the two neighbouring lines.
pub fn cross_section(field: &ScalarField, axis: Axis, offset: f64) -> Result<Profile> {
    let g = &field.geometry;
    let (cx, cy) = g.center();
    let (fixed_len, run_len, origin) = match axis {
        Axis::X => (g.nx(), g.ny(), cx),
        Axis::Y => (g.ny(), g.nx(), cy),
    };
    let pos = (offset + origin) / g.spacing();
    let last = (fixed_len - 1) as f64;
    if !(pos >= -1e-9 && pos <= last + 1e-9) {
        return Err(Error::Observable(format!("offset {offset} lies outside the grid")));
    }
    let pos = pos.clamp(0.0, last);
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let (lo, hi, frac) = if frac < 1e-9 {
        (lo, lo, 0.0)
    } else if frac > 1.0 - 1e-9 {
        (lo + 1, lo + 1, 0.0)
    } else {
        (lo, lo + 1, frac)
    };
    let at = |line: usize, i: usize| match axis {
        Axis::X => field.values[i * g.nx() + line],
        Axis::Y => field.values[line * g.nx() + i],
    };
    let run_origin = match axis {
        Axis::X => cy,
        Axis::Y => cx,
    };
    let coords = (0..run_len).map(|i| i as f64 * g.spacing() - run_origin).collect();
    let values = (0..run_len).map(|i| (1.0 - frac) * at(lo, i) + frac * at(hi, i)).collect();
    Ok(Profile { coords, values })
}

/// Values along the diagonal `x = y`, against the signed distance from the axis.
/// Requires the diagonal to pass through grid sites.
pub fn diagonal_profile(field: &ScalarField) -> Result<Profile> {
    let g = &field.geometry;
    let (cx, cy) = g.center();
    let shift = (cx - cy) / g.spacing();
    if (shift - shift.round()).abs() > 1e-9 {
        return Err(Error::Observable("diagonal x = y does not pass through grid sites".into()));
    }
    let shift = shift.round() as i64;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for iy in 0..g.ny() as i64 {
        let ix = iy + shift;
        if ix < 0 || ix >= g.nx() as i64 {
            continue;
        }
        let p = iy as usize * g.nx() + ix as usize;
        let (x, y) = g.coords(p);
        coords.push((x + y) / std::f64::consts::SQRT_2);
        values.push(field.values[p]);
    }
    Ok(Profile { coords, values })
}

/// Total of the field over sites within `margin` sites of an edge.
pub fn boundary_mass(field: &ScalarField, margin: usize) -> Result<f64> {
    let g = &field.geometry;
    if margin == 0 || 2 * margin >= g.nx().min(g.ny()) {
        return Err(Error::param("margin", format!("need 1 <= margin < {}", g.nx().min(g.ny()).div_ceil(2))));
    }
    Ok((0..g.num_sites()).filter(|&p| g.edge_distance(p) < margin).map(|p| field.values[p]).sum())
}

/// `max_p |f(R p) - f(p)|` for the quarter turn `R` about the axis.
pub fn quarter_turn_asymmetry(field: &ScalarField) -> Result<f64> {
    let perm = field
        .geometry
        .quarter_turn_permutation()
        .ok_or_else(|| Error::Observable("grid is not invariant under a quarter turn".into()))?;
    Ok(perm.iter().enumerate().map(|(p, &q)| (field.values[q] - field.values[p]).abs()).fold(0.0, f64::max))
}

/// The site of smallest current magnitude inside the density lobe holding the global
/// maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobeCurrentMinimum {
    pub site: usize,
    /// Site-averaged current magnitude there.
    pub current: f64,
    pub density: f64,
    pub peak_density: f64,
    /// Largest site current magnitude inside the lobe.
    pub max_current: f64,
    pub lobe_sites: usize,
}

impl LobeCurrentMinimum {
    pub fn density_ratio(&self) -> f64 {
        self.density / self.peak_density
    }
}

/// The lobe is the disk of radius `radius_factor` times the density-weighted RMS radius,
/// centred on the density centroid, both taken over the quadrant containing the
/// density maximum.
pub fn lobe_current_minimum(density: &ScalarField, currents: &BondField, radius_factor: f64) -> Result<LobeCurrentMinimum> {
    let g = &density.geometry;
    if currents.geometry != *g {
        return Err(Error::Observable("density and currents live on different grids".into()));
    }
    if !(radius_factor.is_finite() && radius_factor > 0.0) {
        return Err(Error::param("radius_factor", format!("must be positive, got {radius_factor}")));
    }
    let peak = density.argmax();
    let (px, py) = g.coords(peak);
    let quadrant: Vec<usize> = (0..g.num_sites())
        .filter(|&p| {
            let (x, y) = g.coords(p);
            x * px > 0.0 && y * py > 0.0
        })
        .collect();
    let weight: f64 = quadrant.iter().map(|&p| density.values[p]).sum();
    if quadrant.is_empty() || weight <= 0.0 {
        return Err(Error::Observable("density maximum does not lie inside a quadrant".into()));
    }
    let (mx, my) = quadrant.iter().fold((0.0, 0.0), |(a, b), &p| {
        let (x, y) = g.coords(p);
        let w = density.values[p] / weight;
        (a + x * w, b + y * w)
    });
    let dist2 = |p: usize| {
        let (x, y) = g.coords(p);
        (x - mx).powi(2) + (y - my).powi(2)
    };
    let var: f64 = quadrant.iter().map(|&p| dist2(p) * density.values[p] / weight).sum();
    let r2 = radius_factor * radius_factor * var;
    let lobe: Vec<usize> = quadrant.into_iter().filter(|&p| dist2(p) <= r2).collect();
    if lobe.is_empty() {
        return Err(Error::Observable("lobe contains no sites".into()));
    }
    let magnitudes = currents.site_magnitudes();
    let site = *lobe
        .iter()
        .min_by(|&&a, &&b| magnitudes[a].total_cmp(&magnitudes[b]))
        .expect("non-empty");
    Ok(LobeCurrentMinimum {
        site,
        current: magnitudes[site],
        density: density.values[site],
        peak_density: density.values[peak],
        max_current: lobe.iter().map(|&p| magnitudes[p]).fold(0.0, f64::max),
        lobe_sites: lobe.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{dense_oracle, solve_lowest, SolverOptions};
    use crate::hamiltonian::build;
    use approx::assert_abs_diff_eq;

    fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / n).collect()
    }

    #[test]
    fn density_is_normalized() {
        let g = LatticeGeometry::new(3, 4, 1.0).unwrap();
        let state = normalized((0..12).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect());
        let f = density(&g, &state).unwrap();
        assert_abs_diff_eq!(f.total(), 1.0, epsilon = 1e-12);
        assert!(density(&g, &state[..5]).is_err());
    }

    #[test]
    fn bond_lookup_matches_bond_list() {
        let g = LatticeGeometry::new(5, 3, 1.0).unwrap();
        let field = BondField { geometry: g, bonds: g.bonds(), values: (0..22).map(f64::from).collect() };
        for (k, b) in field.bonds.iter().enumerate() {
            assert_eq!(field.current(b.from, b.to).unwrap(), k as f64);
            assert_eq!(field.current(b.to, b.from).unwrap(), -(k as f64));
        }
        assert!(field.current(0, 2).is_err());
    }

    #[test]
    fn plane_wave_current_points_downstream() {
        let g = LatticeGeometry::new(6, 2, 1.0).unwrap();
        let k = 0.4;
        let state = normalized((0..12).map(|p| Complex64::from_polar(1.0, k * (p % 6) as f64)).collect());
        let j = bond_currents(&g, &ModelParams::hubbard(1.0, 0.0, 0.0), &state).unwrap();
        let expected = 2.0 * k.sin() / 12.0;
        for (b, &v) in j.bonds.iter().zip(&j.values) {
            match b.direction {
                Direction::PlusX => assert_abs_diff_eq!(v, expected, epsilon = 1e-14),
                Direction::PlusY => assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14),
            }
        }
    }

    #[test]
    fn real_ground_state_carries_no_current() {
        let g = LatticeGeometry::new(8, 8, 1.0).unwrap();
        let params = ModelParams::hubbard(1.0, 0.2, 0.0);
        let h = build(&g, &params).unwrap();
        let s = solve_lowest(&h, 1, &SolverOptions::default()).unwrap();
        // remove the arbitrary global phase
        let phase = s.eigenvectors[0][27].conj() / s.eigenvectors[0][27].norm();
        let psi: Vec<Complex64> = s.eigenvectors[0].iter().map(|a| a * phase).collect();
        let j = bond_currents(&g, &params, &psi).unwrap();
        assert!(j.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn multiplet_average_is_basis_independent() {
        let g = LatticeGeometry::new(2, 2, 1.0).unwrap();
        let h = build(&g, &ModelParams::hubbard(1.0, 0.0, 0.0)).unwrap();
        let s = dense_oracle(&h).unwrap();
        assert_eq!(s.multiplets[1], 1..3);
        let avg = multiplet_average_density(&g, &s, 1..3).unwrap();
        let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
        let phase = Complex64::from_polar(1.0, 1.1);
        let mut mixed = s.clone();
        for p in 0..4 {
            let (a, b) = (s.eigenvectors[1][p], s.eigenvectors[2][p]);
            mixed.eigenvectors[1][p] = a * c + b * sn * phase;
            mixed.eigenvectors[2][p] = -a * sn * phase.conj() + b * c;
        }
        let avg2 = multiplet_average_density(&g, &mixed, 1..3).unwrap();
        for (x, y) in avg.values.iter().zip(&avg2.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        let single = multiplet_average_density(&g, &s, 0..1).unwrap();
        assert_eq!(single, density(&g, &s.eigenvectors[0]).unwrap());
        assert!(matches!(multiplet_average_density(&g, &s, 2..2), Err(Error::EmptyMultiplet)));
    }

    #[test]
    fn fermion_filling_edge_cases() {
        let g = LatticeGeometry::new(4, 4, 1.0).unwrap();
        let h = build(&g, &ModelParams::hubbard(1.0, 0.3, 0.1)).unwrap();
        let s = dense_oracle(&h).unwrap();
        let full = fermion_density(&g, &s, 16).unwrap();
        for v in &full.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let one = fermion_density(&g, &s, 1).unwrap();
        let ground = multiplet_average_density(&g, &s, s.multiplets[0].clone()).unwrap();
        assert_eq!(one.values, ground.values);
        assert!(fermion_density(&g, &s, 17).is_err());

        let partial = solve_lowest(&h, 3, &SolverOptions::default()).unwrap();
        assert!(matches!(fermion_density(&g, &partial, 3), Err(Error::InsufficientStates { .. })));
    }

    #[test]
    fn fractional_filling_of_a_degenerate_level() {
        let g = LatticeGeometry::new(2, 2, 1.0).unwrap();
        let h = build(&g, &ModelParams::hubbard(1.0, 0.0, 0.0)).unwrap();
        let s = dense_oracle(&h).unwrap();
        let two = fermion_density(&g, &s, 2).unwrap();
        assert_abs_diff_eq!(two.total(), 2.0, epsilon = 1e-12);
        let expected: Vec<f64> = (0..4)
            .map(|p| {
                s.eigenvectors[0][p].norm_sqr()
                    + 0.5 * (s.eigenvectors[1][p].norm_sqr() + s.eigenvectors[2][p].norm_sqr())
            })
            .collect();
        for (a, b) in two.values.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn cross_sections() {
        let g = LatticeGeometry::new(4, 3, 1.0).unwrap();
        let f = ScalarField::new(g, (0..12).map(f64::from).collect()).unwrap();
        // y = 0 is the middle row (iy = 1)
        let p = cross_section(&f, Axis::Y, 0.0).unwrap();
        assert_eq!(p.values, vec![4.0, 5.0, 6.0, 7.0]);
        assert_eq!(p.coords, vec![-1.5, -0.5, 0.5, 1.5]);
        // x = 0 falls between columns 1 and 2
        let p = cross_section(&f, Axis::X, 0.0).unwrap();
        assert_eq!(p.values, vec![1.5, 5.5, 9.5]);
        assert!(cross_section(&f, Axis::Y, 1.5).is_err());
        assert!(cross_section(&f, Axis::X, -1.5).is_ok());

        let uniform = ScalarField::new(g, vec![0.25; 12]).unwrap();
        assert!(cross_section(&uniform, Axis::Y, 0.3).unwrap().values.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn diagonal_of_rectangular_grid() {
        let g = LatticeGeometry::new(6, 4, 1.0).unwrap();
        let f = ScalarField::new(g, (0..24).map(f64::from).collect()).unwrap();
        let d = diagonal_profile(&f).unwrap();
        assert_eq!(d.values, vec![1.0, 8.0, 15.0, 22.0]);
        assert_abs_diff_eq!(d.coords[0], -1.5 * std::f64::consts::SQRT_2, epsilon = 1e-12);
        let odd = LatticeGeometry::new(5, 4, 1.0).unwrap();
        assert!(diagonal_profile(&ScalarField::new(odd, vec![0.0; 20]).unwrap()).is_err());
    }

    #[test]
    fn lobe_minimum_finds_the_still_site() {
        let g = LatticeGeometry::new(12, 12, 1.0).unwrap();
        let (lx, ly) = (-3.0, 3.0);
        let dens: Vec<f64> = (0..144)
            .map(|p| {
                let (x, y) = g.coords(p);
                (-((x - lx).powi(2) + (y - ly).powi(2)) / 2.0).exp()
            })
            .collect();
        let density = ScalarField::new(g, dens).unwrap();
        let bonds = g.bonds();
        // current grows with distance from the lobe centre
        let values = bonds
            .iter()
            .map(|b| {
                let (x, y) = g.coords(b.from);
                0.1 + (x - lx).abs() + (y - ly).abs()
            })
            .collect();
        let currents = BondField { geometry: g, bonds, values };
        let m = lobe_current_minimum(&density, &currents, 1.5).unwrap();
        let (x, y) = g.coords(m.site);
        assert!((x - lx).abs() <= 1.0 && (y - ly).abs() <= 1.0);
        assert!(m.density_ratio() > 0.5);
        assert!(m.current < m.max_current);
        assert!(lobe_current_minimum(&density, &currents, 0.0).is_err());
    }

    #[test]
    fn boundary_mass_counts_edge_rings() {
        for (n, w) in [(10usize, 1usize), (10, 3), (9, 4)] {
            let g = LatticeGeometry::new(n, n, 1.0).unwrap();
            let f = ScalarField::new(g, vec![1.0 / (n * n) as f64; n * n]).unwrap();
            let expected = 1.0 - ((n - 2 * w) * (n - 2 * w)) as f64 / (n * n) as f64;
            assert_abs_diff_eq!(boundary_mass(&f, w).unwrap(), expected, epsilon = 1e-12);
        }
        let g = LatticeGeometry::new(10, 10, 1.0).unwrap();
        let f = ScalarField::new(g, vec![0.01; 100]).unwrap();
        assert!(boundary_mass(&f, 0).is_err());
        assert!(boundary_mass(&f, 5).is_err());
    }

    #[test]
    fn asymmetry_of_symmetric_and_skewed_fields() {
        let g = LatticeGeometry::new(5, 5, 1.0).unwrap();
        let sym = ScalarField::new(g, (0..25).map(|p| g.radius(p)).collect()).unwrap();
        assert!(quarter_turn_asymmetry(&sym).unwrap() < 1e-12);
        let skew = ScalarField::new(g, (0..25).map(|p| g.coords(p).0).collect()).unwrap();
        assert_abs_diff_eq!(quarter_turn_asymmetry(&skew).unwrap(), 4.0, epsilon = 1e-12);
    }
}
