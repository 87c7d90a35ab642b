//! Dense complex Hermitian matrices.
//!
//! Every quantum object in the crate (POVM elements, Toeplitz operators,
//! noise operators) is carried by [`HermitianMatrix`]. Values are immutable
//! once built; all operations return fresh matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reconstruction tolerance (relative) used by the eigensolver checks.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 100_000;

/// A finite-dimensional Hermitian operator.
///
/// Construction symmetrizes the input as `(A + A*)/2` and records the
/// largest entrywise deviation from Hermiticity that was removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
    defect: f64,
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    /// `Σ λ_k v_k v_k*`.
    pub fn recompose(&self) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*lambda);
        }
        &scaled * v.adjoint()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from arbitrary square complex data.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for c in 0..cols {
            for r in 0..rows {
                let z = data[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        let adj = data.adjoint();
        let mut defect = 0.0f64;
        for c in 0..cols {
            for r in 0..rows {
                defect = defect.max((data[(r, c)] - adj[(r, c)]).norm());
            }
        }
        let data = (data + adj).scale(0.5);
        Ok(Self { data, defect })
    }

    /// Wraps data already known to be exactly Hermitian, skipping checks.
    pub(crate) fn from_hermitian_unchecked(data: DMatrix<Complex64>) -> Self {
        Self { data, defect: 0.0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        Self::from_hermitian_unchecked(m)
    }

    /// Builds from a real row-major table.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = Complex64::new(*v, 0.0);
            }
        }
        Self::new(m)
    }

    /// Rank-one projector `v v*` (v is not normalized here).
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let m = DMatrix::from_fn(n, n, |r, c| v[r] * v[c].conj());
        Self::from_hermitian_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Largest entrywise Hermiticity defect removed at construction.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_hermitian_unchecked(&self.data + &other.data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_hermitian_unchecked(&self.data - &other.data))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_hermitian_unchecked(self.data.scale(c))
    }

    /// `A²`, re-symmetrized to remove rounding asymmetry.
    pub fn square(&self) -> Self {
        let p = &self.data * &self.data;
        Self::hermitian_part(p)
    }

    /// `B A B` for Hermitian `B`; the result is Hermitian.
    pub fn sandwich(&self, outer: &Self) -> Result<Self> {
        self.check_dim(outer)?;
        let p = &outer.data * &self.data * &outer.data;
        Ok(Self::hermitian_part(p))
    }

    /// `i(AB − BA)`, the Hermitian form of the commutator.
    pub fn commutator_i(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let ab = &self.data * &other.data;
        let c = &ab - ab.adjoint();
        Ok(Self::hermitian_part(c * Complex64::i()))
    }

    /// Maximum entrywise distance to another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(max_abs_diff(&self.data, &other.data))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|c| (0..n).all(|r| r == c || self.data[(r, c)] == Complex64::new(0.0, 0.0)))
    }

    fn hermitian_part(m: DMatrix<Complex64>) -> Self {
        let adj = m.adjoint();
        Self::from_hermitian_unchecked((m + adj).scale(0.5))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut vals: Vec<f64> = if self.is_diagonal() {
            self.data.diagonal().iter().map(|z| z.re).collect()
        } else {
            self.data.symmetric_eigenvalues().iter().copied().collect()
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver { dim: self.dim() });
        }
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().unwrap())
    }

    /// Operator norm: the largest eigenvalue magnitude.
    pub fn op_norm(&self) -> Result<f64> {
        let vals = self.eigenvalues()?;
        Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
    }

    /// Full spectral decomposition with ascending eigenvalues.
    pub fn spectral_decomp(&self) -> Result<SpectralDecomposition> {
        let n = self.dim();
        if self.is_diagonal() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| self.data[(a, a)].re.total_cmp(&self.data[(b, b)].re));
            let mut vecs = DMatrix::zeros(n, n);
            for (col, &i) in order.iter().enumerate() {
                vecs[(i, col)] = Complex64::new(1.0, 0.0);
            }
            let eigenvalues = order.iter().map(|&i| self.data[(i, i)].re).collect();
            return Ok(SpectralDecomposition {
                eigenvalues,
                eigenvectors: vecs,
            });
        }
        let eig = SymmetricEigen::try_new(self.data.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or(Error::Eigensolver { dim: n })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver { dim: n });
        }
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Default positivity tolerance `1e-10 · dim · ‖A‖`.
    pub fn default_psd_tol(&self) -> Result<f64> {
        Ok(1e-10 * self.dim() as f64 * self.op_norm()?.max(1.0))
    }

    /// Principal square root of a PSD matrix.
    ///
    /// Eigenvalues in `[-tol, 0)` are clamped to zero before taking roots.
    pub fn psd_sqrt(&self, tol: f64) -> Result<Self> {
        let dec = self.spectral_decomp()?;
        if dec.eigenvalues[0] < -tol {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: dec.eigenvalues[0],
                tol,
            });
        }
        let roots = SpectralDecomposition {
            eigenvalues: dec.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect(),
            eigenvectors: dec.eigenvectors,
        };
        Ok(Self::hermitian_part(roots.recompose()))
    }

    /// `‖AB − BA‖_op`.
    pub fn comm_norm(&self, other: &Self) -> Result<f64> {
        self.commutator_i(other)?.op_norm()
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Wire form `{dim, re, im}` with row-major arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(m: HermitianMatrix) -> Self {
        let n = m.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = m.data[(r, c)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        MatrixJson { dim: n, re, im }
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        if j.re.len() != n * n || j.im.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: j.re.len().min(j.im.len()),
            });
        }
        let m = DMatrix::from_fn(n, n, |r, c| {
            Complex64::new(j.re[r * n + c], j.im[r * n + c])
        });
        HermitianMatrix::new(m)
    }
}
