//! Small sparse-matrix helper for the integrator hot loops.
//!
//! Hamiltonians here have a handful of nonzeros per row while density matrices
//! are kept dense, so the only products that matter are sparse × dense-vector
//! and sparse × dense-matrix (from either side).

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Square matrix in coordinate format. Duplicate coordinates are summed.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Collects the entries of `m` whose modulus exceeds `tol`.
    pub fn from_dense(m: &DMatrix<C64>, tol: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "sparse matrices are square");
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z.norm() > tol {
                    entries.push((i, j, z));
                }
            }
        }
        Self { dim: m.nrows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Replaces the contents with a copy of `other`, reusing the allocation.
    pub fn assign(&mut self, other: &SparseMatrix) {
        self.dim = other.dim;
        self.entries.clear();
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, value));
    }

    /// Appends `scale * other` to this matrix.
    pub fn add_scaled(&mut self, other: &SparseMatrix, scale: C64) {
        debug_assert_eq!(self.dim, other.dim);
        self.entries.extend(other.entries.iter().map(|&(i, j, z)| (i, j, z * scale)));
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(i, j, z)| (j, i, z.conj())).collect() }
    }

    /// Sums duplicate coordinates and drops exact zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut out: Vec<(usize, usize, C64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, z) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += z,
                _ => out.push((i, j, z)),
            }
        }
        out.retain(|e| e.2 != C64::new(0.0, 0.0));
        self.entries = out;
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z;
        }
        m
    }

    /// `out = scale * A x`
    pub fn mul_vec_into(&self, x: &DVector<C64>, scale: C64, out: &mut DVector<C64>) {
        out.fill(C64::new(0.0, 0.0));
        for &(i, j, z) in &self.entries {
            out[i] += scale * z * x[j];
        }
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim);
        self.mul_vec_into(x, C64::new(1.0, 0.0), &mut out);
        out
    }

    /// `out += scale * A rho`
    pub fn left_mul_acc(&self, rho: &DMatrix<C64>, scale: C64, out: &mut DMatrix<C64>) {
        let n = rho.ncols();
        for &(i, k, z) in &self.entries {
            let a = scale * z;
            for j in 0..n {
                out[(i, j)] += a * rho[(k, j)];
            }
        }
    }

    /// `out += scale * rho A`
    pub fn right_mul_acc(&self, rho: &DMatrix<C64>, scale: C64, out: &mut DMatrix<C64>) {
        let n = rho.nrows();
        for &(k, j, z) in &self.entries {
            let a = scale * z;
            for i in 0..n {
                out[(i, j)] += a * rho[(i, k)];
            }
        }
    }

    /// Largest entry of `|A - A^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.to_dense();
        max_abs_diff(&d, &d.adjoint())
    }
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
