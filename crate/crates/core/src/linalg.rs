//! Dense real-symmetric linear algebra shared by the rest of the crate.
//!
//! All operators in the constructions are real symmetric, so a single
//! symmetric eigen-solver covers spectral norms, PSD projection and the
//! state updates of the see-saw.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest matrix dimension `kron` will produce unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Square real symmetric matrix, stored in full row-major form.
///
/// Every constructor writes `(i, j)` and `(j, i)` from the same value so the
/// stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = v;
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds from full row-major data, averaging mirrored entries. Entries
    /// that disagree by more than `tol` (relative to the largest entry) are
    /// rejected.
    pub fn from_row_major(dim: usize, data: &[f64], tol: f64) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(libm::fabs(*v)));
        for i in 0..dim {
            for j in (i + 1)..dim {
                if libm::fabs(data[i * dim + j] - data[j * dim + i]) > tol * scale {
                    return Err(Error::InvalidInput(alloc::format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| {
            0.5 * (data[i * dim + j] + data[j * dim + i])
        }))
    }

    /// `scale · u uᵀ`.
    pub fn outer(u: &[f64], scale: f64) -> Self {
        Self::from_fn(u.len(), |i, j| scale * u[i] * u[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `tr(A B)`.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `vᵀ A v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let r: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += v[i] * r;
        }
        acc
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let r: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += u[i] * r;
        }
        acc
    }

    /// `Tᵀ A T` for a square `T` of the same size.
    pub fn congruence(&self, t: &Matrix) -> Self {
        debug_assert_eq!(t.rows, self.dim);
        let at = self.to_dmatrix() * t.to_dmatrix();
        let r = t.to_dmatrix().transpose() * at;
        Self::from_dmatrix(&r)
    }

    /// `D A D` for diagonal `D = diag(d)`.
    pub fn diag_sandwich(&self, d: &[f64]) -> Self {
        Self::from_fn(self.dim, |i, j| d[i] * self.get(i, j) * d[j])
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Symmetrizes an arbitrary square `DMatrix` as `(A + Aᵀ)/2`.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: Self) -> SymMatrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: Self) -> SymMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scaled(rhs)
    }
}

/// General dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn from_sym(s: &SymMatrix) -> Self {
        Self {
            rows: s.dim(),
            cols: s.dim(),
            data: s.as_slice().to_vec(),
        }
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending values, orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `V f(Λ) Vᵀ`.
    pub fn recompose(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * fv[k] * self.vectors.get(j, k))
                .sum()
        })
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// `A ⊗ B` with the default dimension cap.
pub fn kron(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    kron_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_with_cap(a: &SymMatrix, b: &SymMatrix, cap: usize) -> Result<SymMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let required = da
        .checked_mul(db)
        .ok_or(Error::DimensionCap { required: usize::MAX, cap })?;
    if required > cap {
        return Err(Error::DimensionCap { required, cap });
    }
    let mut out = SymMatrix::zeros(required);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for p in 0..db {
                let row = (i * db + p) * required + j * db;
                for q in 0..db {
                    out.data[row + q] = aij * b.get(p, q);
                }
            }
        }
    }
    Ok(out)
}

/// Symmetric eigen-decomposition, eigenvalues ascending.
pub fn herm_eig(a: &SymMatrix) -> Result<EigDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Ok(EigDecomposition {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let max_iter = 1000 * n.max(8);
    let eig = SymmetricEigen::try_new(a.to_dmatrix(), f64::EPSILON, max_iter).ok_or_else(|| {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum();
        Error::NoConvergence {
            iterations: max_iter,
            residual: libm::sqrt(off),
        }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigDecomposition { values, vectors })
}

/// Largest singular value of a (possibly rectangular) matrix.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.rows == 0 || a.cols == 0 || a.data.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    a.to_dmatrix()
        .singular_values()
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

/// Frobenius-nearest PSD matrix: eigenvalues clipped at zero.
pub fn psd_project(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = herm_eig(a)?;
    if eig.min_value() >= 0.0 {
        return Ok(a.clone());
    }
    Ok(eig.recompose(|v| v.max(0.0)))
}

/// `S^{-1/2}` for a positive definite `S`; eigenvalues below `floor` are
/// treated as `floor`.
pub fn inv_sqrt_psd(s: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    let eig = herm_eig(s)?;
    Ok(eig.recompose(|v| 1.0 / libm::sqrt(v.max(floor))))
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn top_eigenpair(a: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let eig = herm_eig(a)?;
    let k = eig.values.len() - 1;
    Ok((eig.values[k], eig.vector(k)))
}

/// Singular value decomposition `A = U diag(s) Vᵀ` with `s` nonincreasing.
pub fn svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let d = a.to_dmatrix();
    let svd = d.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let um = Matrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let vm = Matrix::from_fn(vt.ncols(), k, |i, j| vt[(order[j], i)]);
    (um, s, vm)
}
