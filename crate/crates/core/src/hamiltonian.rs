//! Single-particle Hamiltonians in the rotating frame.
//!
//! Two builders share one grid:
//!
//! * [`build_hubbard`]: single-band tight-binding lattice with hopping `t`, a rotational
//!   hopping term proportional to `Ω K_pq`, and the harmonic trap `ω² r² / 2` on the diagonal.
//! * [`build_discretized_continuum`]: `-∇²/2 + ω²ρ²/2 - Ω L_z` on a mesh of spacing `h`,
//!   with the 5-point Laplacian and central differences for `L_z = -i(x ∂_y - y ∂_x)`.
//!
//! With the default [`RotationCoupling::LzMatched`], the lattice with `t = 1/(2d²)` is
//! the discretized continuum at `h = d` shifted down by `4t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticeGeometry;
use crate::sparse::SparseHermitianMatrix;

/// Lattice constant for which the band mass at `k = 0` is one when `t = 1`.
pub const UNIT_MASS_SPACING: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Hubbard,
    #[serde(alias = "continuum")]
    DiscretizedContinuum,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Hubbard => "hubbard",
            ModelKind::DiscretizedContinuum => "continuum",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hubbard" | "lattice" => Ok(ModelKind::Hubbard),
            "continuum" | "discretized-continuum" => Ok(ModelKind::DiscretizedContinuum),
            other => Err(Error::param("model", format!("unknown model `{other}`"))),
        }
    }
}

/// Amplitude of the rotational hopping on the lattice.
///
/// `LzMatched` uses `-t + i(Ω/2)K_pq` for the `p <- q` element, which is exactly the central
/// difference of `-Ω L_z` at mesh `d`. `BareK` uses `-t - iΩK_pq`: opposite sense and twice
/// the strength, so it behaves like rotation at `2Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationCoupling {
    #[default]
    LzMatched,
    BareK,
}

impl std::str::FromStr for RotationCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lz-matched" => Ok(RotationCoupling::LzMatched),
            "bare-k" => Ok(RotationCoupling::BareK),
            other => Err(Error::param("coupling", format!("unknown coupling `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Hopping energy; ignored by the continuum builder, where it is `1/(2h²)`.
    pub t: f64,
    /// Trap frequency ω.
    pub omega: f64,
    /// Rotation frequency Ω.
    pub bigomega: f64,
    #[serde(default)]
    pub coupling: RotationCoupling,
}

impl ModelParams {
    pub fn hubbard(t: f64, omega: f64, bigomega: f64) -> Self {
        ModelParams { kind: ModelKind::Hubbard, t, omega, bigomega, coupling: RotationCoupling::LzMatched }
    }

    pub fn continuum(omega: f64, bigomega: f64) -> Self {
        ModelParams {
            kind: ModelKind::DiscretizedContinuum,
            t: 1.0,
            omega,
            bigomega,
            coupling: RotationCoupling::LzMatched,
        }
    }

    pub fn with_bigomega(mut self, bigomega: f64) -> Self {
        self.bigomega = bigomega;
        self
    }

    pub fn with_coupling(mut self, coupling: RotationCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::param("t", format!("must be positive, got {}", self.t)));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::param("omega", format!("must be non-negative, got {}", self.omega)));
        }
        if !(self.bigomega.is_finite() && self.bigomega >= 0.0) {
            return Err(Error::param("bigomega", format!("must be non-negative, got {}", self.bigomega)));
        }
        Ok(())
    }

    /// Effective hopping energy on a grid of this spacing.
    pub fn hopping_energy(&self, spacing: f64) -> f64 {
        match self.kind {
            ModelKind::Hubbard => self.t,
            ModelKind::DiscretizedContinuum => 0.5 / (spacing * spacing),
        }
    }

    /// Energy at the bottom of the free band, `-4t`, for the lattice; zero for the
    /// continuum, whose kinetic diagonal already carries `+4t`.
    pub fn band_bottom(&self) -> f64 {
        match self.kind {
            ModelKind::Hubbard => -4.0 * self.t,
            ModelKind::DiscretizedContinuum => 0.0,
        }
    }

    /// `√(Ω² - ω²)` above the centrifugal limit, zero below it.
    pub fn supercritical_margin(&self) -> f64 {
        if self.bigomega > self.omega {
            (self.bigomega * self.bigomega - self.omega * self.omega).sqrt()
        } else {
            0.0
        }
    }
}

/// Harmonic trap `ω²r²/2`. The frequency is the trap frequency ω, not the rotation frequency Ω.
#[inline]
pub fn trap_potential(omega: f64, x: f64, y: f64) -> f64 {
    0.5 * omega * omega * (x * x + y * y)
}

/// Matrix element `H[p, q]` for neighbouring sites `p`, `q`, without validation.
#[inline]
pub(crate) fn hopping_amplitude(geom: &LatticeGeometry, params: &ModelParams, p: usize, q: usize) -> Complex64 {
    let k = geom.cross_factor(p, q);
    let t = params.hopping_energy(geom.spacing());
    match (params.kind, params.coupling) {
        (ModelKind::Hubbard, RotationCoupling::BareK) => Complex64::new(-t, -params.bigomega * k),
        _ => Complex64::new(-t, 0.5 * params.bigomega * k),
    }
}

/// Checked matrix element `H[p, q]` between neighbouring sites.
pub fn hopping(geom: &LatticeGeometry, params: &ModelParams, p: usize, q: usize) -> Result<Complex64> {
    if !geom.are_neighbors(p, q) {
        return Err(Error::NotNeighbors(p, q));
    }
    Ok(hopping_amplitude(geom, params, p, q))
}

fn assemble(geom: &LatticeGeometry, params: &ModelParams, diagonal_offset: f64) -> SparseHermitianMatrix {
    let rows = (0..geom.num_sites())
        .map(|p| {
            let (x, y) = geom.coords(p);
            let mut row = Vec::with_capacity(5);
            row.push((p, Complex64::new(diagonal_offset + trap_potential(params.omega, x, y), 0.0)));
            row.extend(geom.neighbors(p).map(|q| (q, hopping_amplitude(geom, params, p, q))));
            row
        })
        .collect();
    SparseHermitianMatrix::from_rows(rows).expect("columns come from the geometry")
}

pub fn build_hubbard(geom: &LatticeGeometry, params: &ModelParams) -> Result<SparseHermitianMatrix> {
    params.validate()?;
    if params.kind != ModelKind::Hubbard {
        return Err(Error::param("kind", "build_hubbard needs a hubbard model"));
    }
    Ok(assemble(geom, params, 0.0))
}

pub fn build_discretized_continuum(geom: &LatticeGeometry, params: &ModelParams) -> Result<SparseHermitianMatrix> {
    params.validate()?;
    if params.kind != ModelKind::DiscretizedContinuum {
        return Err(Error::param("kind", "build_discretized_continuum needs a continuum model"));
    }
    let h = geom.spacing();
    Ok(assemble(geom, params, 2.0 / (h * h)))
}

/// Dispatches on `params.kind`.
pub fn build(geom: &LatticeGeometry, params: &ModelParams) -> Result<SparseHermitianMatrix> {
    match params.kind {
        ModelKind::Hubbard => build_hubbard(geom, params),
        ModelKind::DiscretizedContinuum => build_discretized_continuum(geom, params),
    }
}

/// Closed-form continuum level `ω + (ω - Ω) j + (ω + Ω) k`, valid for `Ω <= ω`.
pub fn analytic_spectrum(omega: f64, bigomega: f64, j: u32, k: u32) -> Result<f64> {
    if bigomega > omega {
        return Err(Error::Supercritical { omega, bigomega });
    }
    Ok(omega + (omega - bigomega) * j as f64 + (omega + bigomega) * k as f64)
}

/// The `count` lowest closed-form levels with their `(j, k)` labels, ascending.
/// Ties are ordered by `k`.
pub fn analytic_levels(omega: f64, bigomega: f64, count: usize) -> Result<Vec<(u32, u32, f64)>> {
    if bigomega > omega {
        return Err(Error::Supercritical { omega, bigomega });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if omega == bigomega {
        // the j ladder is flat: every level is the lowest one
        return Ok((0..count as u32).map(|j| (j, 0, omega)).collect());
    }
    // every level below the count-th one has j, k < count
    let n = count as u32;
    let mut levels = Vec::with_capacity((n * n) as usize);
    for k in 0..n {
        for j in 0..n {
            levels.push((j, k, analytic_spectrum(omega, bigomega, j, k)?));
        }
    }
    levels.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)));
    levels.truncate(count);
    Ok(levels)
}

/// Band mass `1 / (2 t d² cos(kd))` of the lattice.
pub fn effective_mass(t: f64, d: f64, k: f64) -> Result<f64> {
    let c = (k * d).cos();
    if c.abs() < 1e-12 {
        return Err(Error::BandInflection(c));
    }
    Ok(1.0 / (2.0 * t * d * d * c))
}
