//! Lowest eigenpairs of sparse Hermitian matrices.
//!
//! [`solve_lowest`] runs a thick-restart block Lanczos iteration. Every new block is
//! orthogonalized twice against the whole basis (classical Gram-Schmidt with
//! reorthogonalization), so converged directions cannot reappear as spurious copies.
//! At each restart the Rayleigh-Ritz problem of the basis is diagonalized densely, the
//! lowest Ritz vectors are kept, and expansion continues from the pending Krylov block.
//!
//! [`dense_oracle`] diagonalizes the full matrix and is meant for small instances and tests.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseHermitianMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0x5eed_2d1a;
pub const DEFAULT_BLOCK: usize = 4;
pub const DEFAULT_DENSE_CAP: usize = 2000;
/// Eigenvalues closer than this (in energy units) are grouped into one multiplet.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual target relative to `‖H‖₁`.
    pub tol: f64,
    pub seed: u64,
    pub block_size: usize,
    /// Maximum basis dimension before a restart; chosen from `m` when absent.
    pub max_basis: Option<usize>,
    /// Restart budget; `50 m` when absent.
    pub max_restarts: Option<usize>,
    pub cluster_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            block_size: DEFAULT_BLOCK,
            max_basis: None,
            max_restarts: None,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.block_size == 0 {
            return Err(Error::param("block_size", "must be at least 1"));
        }
        if !(self.cluster_tol.is_finite() && self.cluster_tol > 0.0) {
            return Err(Error::param("cluster_tol", format!("must be positive, got {}", self.cluster_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub restarts: usize,
    pub matvecs: usize,
    pub max_basis: usize,
    pub norm_one: f64,
    pub target_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// `‖H v - λ v‖` per pair.
    pub residuals: Vec<f64>,
    /// Contiguous clusters of numerically degenerate eigenvalues.
    pub multiplets: Vec<Range<usize>>,
    pub diagnostics: SolverDiagnostics,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_multiplet(&self) -> Range<usize> {
        self.multiplets[0].clone()
    }

    /// The multiplet containing state `index`.
    pub fn multiplet_of(&self, index: usize) -> Option<Range<usize>> {
        self.multiplets.iter().find(|r| r.contains(&index)).cloned()
    }

    /// Regroups the eigenvalues with a different cluster tolerance.
    pub fn recluster(&mut self, tol: f64) {
        self.multiplets = cluster_multiplets(&self.eigenvalues, tol);
    }

    /// Largest `|<v_i, v_j> - δ_ij|` over all pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let vs = &self.eigenvectors;
        (0..vs.len())
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        let d = dot(&vs[j], &vs[i]);
                        if i == j { (d - 1.0).norm() } else { d.norm() }
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Greedy grouping of an ascending sequence: neighbours join a cluster when their gap is
/// at most `tol`.
pub fn cluster_multiplets(eigenvalues: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tol {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `x -= Σ_i coeffs[i] basis[i]`.
fn subtract_combination(x: &mut [Complex64], basis: &[Vec<Complex64>], coeffs: &[Complex64]) {
    x.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let offset = ci * CHUNK;
        for (v, &c) in basis.iter().zip(coeffs) {
            if c == ZERO {
                continue;
            }
            let seg = &v[offset..offset + chunk.len()];
            for (xr, vr) in chunk.iter_mut().zip(seg) {
                *xr -= c * vr;
            }
        }
    });
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn project_out(x: &mut [Complex64], basis: &[Vec<Complex64>]) {
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let coeffs: Vec<Complex64> = basis.par_iter().map(|v| dot(v, x)).collect();
        subtract_combination(x, basis, &coeffs);
    }
}

/// Orthonormalizes `block` against `basis` and itself. Vectors that collapse are dropped.
fn orthonormalize(block: Vec<Vec<Complex64>>, basis: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut accepted: Vec<Vec<Complex64>> = Vec::with_capacity(block.len());
    for mut x in block {
        let before = norm(&x);
        if before == 0.0 {
            continue;
        }
        project_out(&mut x, basis);
        project_out(&mut x, &accepted);
        let after = norm(&x);
        if after > 1e-10 * before && after > 0.0 {
            scale(&mut x, 1.0 / after);
            accepted.push(x);
        }
    }
    accepted
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Tops `block` up to `want` vectors with random directions orthogonal to `basis`.
fn refill(
    mut block: Vec<Vec<Complex64>>,
    want: usize,
    basis: &[Vec<Complex64>],
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Vec<Vec<Complex64>> {
    let room = n.saturating_sub(basis.len());
    let want = want.min(room);
    let mut attempts = 0;
    while block.len() < want && attempts < 4 * want + 4 {
        attempts += 1;
        let mut x = random_vector(rng, n);
        project_out(&mut x, basis);
        project_out(&mut x, &block);
        let nx = norm(&x);
        // a fresh random vector keeps a healthy share of any complement
        if nx > 1e-6 {
            project_out(&mut x, basis);
            project_out(&mut x, &block);
            let nx = norm(&x);
            scale(&mut x, 1.0 / nx);
            block.push(x);
        }
    }
    block
}

/// `Σ_k coeffs[k, col] basis[k]` for each requested column.
fn combine(basis: &[Vec<Complex64>], coeffs: &DMatrix<Complex64>, cols: Range<usize>) -> Vec<Vec<Complex64>> {
    let n = basis[0].len();
    cols.into_par_iter()
        .map(|j| {
            let mut out = vec![ZERO; n];
            for (k, v) in basis.iter().enumerate() {
                let c = coeffs[(k, j)];
                if c == ZERO {
                    continue;
                }
                for (o, vr) in out.iter_mut().zip(v) {
                    *o += c * vr;
                }
            }
            out
        })
        .collect()
}

fn residual(h_v: &[Complex64], v: &[Complex64], lambda: f64) -> f64 {
    h_v.iter().zip(v).map(|(hv, v)| (hv - v * lambda).norm_sqr()).sum::<f64>().sqrt()
}

fn sorted_eigen(g: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// The `m` algebraically smallest eigenpairs of `matrix`.
pub fn solve_lowest(matrix: &SparseHermitianMatrix, m: usize, opts: &SolverOptions) -> Result<EigenSolution> {
    opts.validate()?;
    let n = matrix.dim();
    if m == 0 || m > n {
        return Err(Error::param("m", format!("need 1 <= m <= {n}, got {m}")));
    }
    let norm_one = matrix.norm_one();
    let target = opts.tol * if norm_one > 0.0 { norm_one } else { 1.0 };
    let block = opts.block_size.min(n);
    let max_basis = opts
        .max_basis
        .unwrap_or_else(|| (3 * m).max(m + 60))
        .max(m + 2 * block)
        .min(n);
    let keep = ((m + max_basis) / 2).max(m + block).min(max_basis.saturating_sub(block)).max(m.min(max_basis));
    let max_restarts = opts.max_restarts.unwrap_or(50 * m);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut diag = SolverDiagnostics { max_basis, norm_one, target_residual: target, ..Default::default() };

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    // projected matrix basis^H H basis, grown column by column
    let mut projected = DMatrix::<Complex64>::zeros(max_basis, max_basis);
    let mut frontier = refill(Vec::new(), block, &basis, &mut rng, n);

    loop {
        // expand
        while !frontier.is_empty() && basis.len() + frontier.len() <= max_basis {
            let start = basis.len();
            let new_images: Vec<Vec<Complex64>> = frontier.iter().map(|x| matrix.apply(x)).collect();
            diag.matvecs += new_images.len();
            basis.append(&mut frontier);
            let end = basis.len();
            let entries: Vec<(usize, usize, Complex64)> = (start..end)
                .into_par_iter()
                .flat_map_iter(|j| {
                    let hx = &new_images[j - start];
                    let basis = &basis;
                    (0..=j).map(move |i| (i, j, dot(&basis[i], hx)))
                })
                .collect();
            for (i, j, v) in entries {
                if i == j {
                    projected[(j, j)] = Complex64::new(v.re, 0.0);
                } else {
                    projected[(i, j)] = v;
                    projected[(j, i)] = v.conj();
                }
            }
            images.extend(new_images);
            let candidate = orthonormalize(images[start..end].to_vec(), &basis);
            frontier = refill(candidate, block, &basis, &mut rng, n);
        }

        let dim = basis.len();
        let (theta, s) = sorted_eigen(projected.view((0, 0), (dim, dim)).into_owned());
        let retain = if frontier.is_empty() { dim } else { keep.min(dim) };
        let ritz = combine(&basis, &s, 0..retain);
        let ritz_images: Vec<Vec<Complex64>> = ritz.par_iter().map(|y| matrix.apply(y)).collect();
        diag.matvecs += retain;
        let residuals: Vec<f64> = (0..m).map(|i| residual(&ritz_images[i], &ritz[i], theta[i])).collect();
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        let converged = worst <= target || frontier.is_empty();

        if converged || diag.restarts >= max_restarts {
            diag.converged = converged;
            let mut eigenvectors = ritz;
            eigenvectors.truncate(m);
            let eigenvalues = theta[..m].to_vec();
            let solution = EigenSolution {
                multiplets: cluster_multiplets(&eigenvalues, opts.cluster_tol),
                eigenvalues,
                eigenvectors,
                residuals,
                diagnostics: diag,
            };
            if converged {
                return Ok(solution);
            }
            return Err(Error::NotConverged {
                restarts: solution.diagnostics.restarts,
                worst,
                target,
                partial: Box::new(solution),
            });
        }

        // thick restart: the Ritz vectors replace the basis; the pending block stays
        // orthogonal to them because it is orthogonal to the whole old basis
        diag.restarts += 1;
        projected.fill(ZERO);
        for (i, &t) in theta.iter().take(retain).enumerate() {
            projected[(i, i)] = Complex64::new(t, 0.0);
        }
        basis = ritz;
        images = ritz_images;
        // the pending block was orthogonal to the old basis; re-project against the
        // new one to shed rounding from the recombination
        frontier = refill(orthonormalize(frontier, &basis), block, &basis, &mut rng, n);
    }
}

/// Full spectrum by dense Hermitian diagonalization, for dimensions up to `cap`.
pub fn dense_oracle_with_cap(matrix: &SparseHermitianMatrix, cap: usize) -> Result<EigenSolution> {
    let n = matrix.dim();
    if n > cap {
        return Err(Error::DenseTooLarge { dim: n, cap });
    }
    let (eigenvalues, vectors) = sorted_eigen(matrix.to_dense());
    let eigenvectors: Vec<Vec<Complex64>> =
        (0..n).map(|c| vectors.column(c).iter().copied().collect()).collect();
    let residuals = eigenvectors
        .par_iter()
        .zip(eigenvalues.par_iter())
        .map(|(v, &l)| residual(&matrix.apply(v), v, l))
        .collect();
    Ok(EigenSolution {
        multiplets: cluster_multiplets(&eigenvalues, DEFAULT_CLUSTER_TOL),
        eigenvalues,
        eigenvectors,
        residuals,
        diagnostics: SolverDiagnostics {
            matvecs: n,
            max_basis: n,
            norm_one: matrix.norm_one(),
            converged: true,
            ..Default::default()
        },
    })
}

pub fn dense_oracle(matrix: &SparseHermitianMatrix) -> Result<EigenSolution> {
    dense_oracle_with_cap(matrix, DEFAULT_DENSE_CAP)
}
