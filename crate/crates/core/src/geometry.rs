//! Finite square grid of sites, placed relative to the rotation axis.
//!
//! Sites are stored row-major: the linear index of `(ix, iy)` is `iy * nx + ix`.
//! Boundaries are open, so edge sites simply have fewer bonds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid coordinates of a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub ix: usize,
    pub iy: usize,
}

impl Site {
    pub const fn new(ix: usize, iy: usize) -> Self {
        Site { ix, iy }
    }
}

/// Orientation of a bond, always pointing from the lower-index site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "+y")]
    PlusY,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::PlusX => "+x",
            Direction::PlusY => "+y",
        }
    }
}

/// Nearest-neighbour pair `from -> to`, with `to = from + x̂` or `from + ŷ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    nx: usize,
    ny: usize,
    spacing: f64,
    center: (f64, f64),
}

impl LatticeGeometry {
    /// Grid with the rotation axis at its geometric midpoint.
    pub fn new(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Geometry(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Geometry(format!("spacing must be positive, got {spacing}")));
        }
        let center = (
            (nx - 1) as f64 * spacing / 2.0,
            (ny - 1) as f64 * spacing / 2.0,
        );
        Ok(LatticeGeometry { nx, ny, spacing, center })
    }

    /// Square grid of spacing `spacing` covering a physical side length of about `extent`.
    pub fn with_extent(extent: f64, spacing: f64) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::Geometry(format!("extent must be positive, got {extent}")));
        }
        let n = (extent / spacing).round() as usize + 1;
        Self::new(n, n, spacing)
    }

    /// Moves the rotation axis to `(cx, cy)`, measured from site `(0, 0)`.
    pub fn with_center(mut self, cx: f64, cy: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::Geometry("rotation axis must be finite".into()));
        }
        self.center = (cx, cy);
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn num_sites(&self) -> usize {
        self.nx * self.ny
    }

    /// True when the axis sits at the geometric midpoint.
    pub fn is_centered(&self) -> bool {
        let mid = Self::new(self.nx, self.ny, self.spacing).expect("validated on construction");
        (mid.center.0 - self.center.0).abs() <= 1e-12 * self.spacing
            && (mid.center.1 - self.center.1).abs() <= 1e-12 * self.spacing
    }

    pub fn index(&self, site: Site) -> Result<usize> {
        if site.ix >= self.nx || site.iy >= self.ny {
            return Err(Error::SiteOutOfRange { ix: site.ix, iy: site.iy, nx: self.nx, ny: self.ny });
        }
        Ok(site.iy * self.nx + site.ix)
    }

    /// Inverse of [`index`](Self::index). Panics on an out-of-range index.
    pub fn site(&self, p: usize) -> Site {
        assert!(p < self.num_sites(), "site index {p} out of range");
        Site { ix: p % self.nx, iy: p / self.nx }
    }

    /// Physical coordinates of site `p` relative to the rotation axis.
    #[inline]
    pub fn coords(&self, p: usize) -> (f64, f64) {
        let ix = p % self.nx;
        let iy = p / self.nx;
        (
            ix as f64 * self.spacing - self.center.0,
            iy as f64 * self.spacing - self.center.1,
        )
    }

    pub fn site_coordinates(&self, site: Site) -> Result<(f64, f64)> {
        Ok(self.coords(self.index(site)?))
    }

    pub fn radius(&self, p: usize) -> f64 {
        let (x, y) = self.coords(p);
        x.hypot(y)
    }

    pub fn are_neighbors(&self, p: usize, q: usize) -> bool {
        let n = self.num_sites();
        if p >= n || q >= n {
            return false;
        }
        let (a, b) = (self.site(p), self.site(q));
        a.ix.abs_diff(b.ix) + a.iy.abs_diff(b.iy) == 1
    }

    /// Nearest neighbours of `p` in the order -x, +x, -y, +y (missing ones skipped).
    pub fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> {
        let Site { ix, iy } = self.site(p);
        let nx = self.nx;
        let candidates = [
            (ix > 0).then(|| p - 1),
            (ix + 1 < nx).then(|| p + 1),
            (iy > 0).then(|| p - nx),
            (iy + 1 < self.ny).then(|| p + nx),
        ];
        candidates.into_iter().flatten()
    }

    /// Every unordered nearest-neighbour pair once, oriented along +x or +y.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut bonds = Vec::with_capacity(2 * self.num_sites());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let p = iy * self.nx + ix;
                if ix + 1 < self.nx {
                    bonds.push(Bond { from: p, to: p + 1, direction: Direction::PlusX });
                }
                if iy + 1 < self.ny {
                    bonds.push(Bond { from: p, to: p + self.nx, direction: Direction::PlusY });
                }
            }
        }
        bonds
    }

    /// Geometric factor `r_p r_q sin(angle between them) / d²` of the rotational hopping,
    /// evaluated as the z-component of the cross product.
    pub fn rotation_factor_k(&self, p: usize, q: usize) -> Result<f64> {
        if !self.are_neighbors(p, q) {
            return Err(Error::NotNeighbors(p, q));
        }
        Ok(self.cross_factor(p, q))
    }

    /// Unchecked version of [`rotation_factor_k`](Self::rotation_factor_k).
    #[inline]
    pub(crate) fn cross_factor(&self, p: usize, q: usize) -> f64 {
        let (xp, yp) = self.coords(p);
        let (xq, yq) = self.coords(q);
        (xp * yq - yp * xq) / (self.spacing * self.spacing)
    }

    /// Image of site `p` under a 90° counter-clockwise rotation about the axis,
    /// `(x, y) -> (-y, x)`, if that image is a grid site.
    pub fn rotate_quarter(&self, p: usize) -> Option<usize> {
        let (x, y) = self.coords(p);
        let fx = (-y + self.center.0) / self.spacing;
        let fy = (x + self.center.1) / self.spacing;
        let (rx, ry) = (fx.round(), fy.round());
        if (fx - rx).abs() > 1e-9 || (fy - ry).abs() > 1e-9 || rx < 0.0 || ry < 0.0 {
            return None;
        }
        let (ix, iy) = (rx as usize, ry as usize);
        (ix < self.nx && iy < self.ny).then(|| iy * self.nx + ix)
    }

    /// Full permutation for the quarter turn, when the site set is invariant under it.
    pub fn quarter_turn_permutation(&self) -> Option<Vec<usize>> {
        (0..self.num_sites()).map(|p| self.rotate_quarter(p)).collect()
    }

    /// Number of sites between `p` and the nearest edge (0 for edge sites).
    pub fn edge_distance(&self, p: usize) -> usize {
        let Site { ix, iy } = self.site(p);
        ix.min(self.nx - 1 - ix).min(iy).min(self.ny - 1 - iy)
    }
}
