//! Dense complex matrices over multi-spin-1/2 Hilbert spaces.
//!
//! Every matrix in this crate lives on a tensor product of spin-1/2 spaces,
//! so dimensions are always powers of two. Storage is row-major.

use num_complex::Complex64;
use thiserror::Error;

/// Default absolute per-entry tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("{count} entries do not fill a {dim}x{dim} matrix")]
    BadEntryCount { dim: usize, count: usize },
}

/// Dense square complex matrix of dimension 2^n, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension. Errors unless `dim` is a power of two.
    pub fn zeros(dim: usize) -> Result<Self, MatrixError> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(MatrixError::NotPowerOfTwo(dim));
        }
        Ok(Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        Ok(m)
    }

    /// Build from a flat row-major entry list.
    pub fn from_flat(dim: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(MatrixError::NotPowerOfTwo(dim));
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::BadEntryCount {
                dim,
                count: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    /// Build from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, MatrixError> {
        Self::from_flat(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Diagonal matrix from complex diagonal entries.
    pub fn from_diag(diag: &[Complex64]) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of spin-1/2 factors (log2 of the dimension).
    pub fn spin_count(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let d = self.dim;
        let mut out = Self::zeros(d)?;
        // ikj order keeps the inner loop contiguous in both operands.
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, &b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
        if v.len() != self.dim {
            return Err(MatrixError::DimMismatch(self.dim, v.len()));
        }
        let out = self
            .data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect();
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d).expect("dim already validated");
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    /// Kronecker product, `self` as the left (most significant) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d).expect("product of powers of two");
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * d + (j * db + l)] = a * other.data[k * db + l];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise equality within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn approx_eq_default(&self, other: &Self) -> bool {
        self.approx_eq(other, DEFAULT_TOL)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in i..d {
                if (self.data[i * d + j] - self.data[j * d + i].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let gram = self.adjoint().mul(self).expect("same dim");
        let id = Self::identity(self.dim).expect("valid dim");
        gram.approx_eq(&id, tol)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(ComplexMatrix::zeros(3), Err(MatrixError::NotPowerOfTwo(3)));
        assert_eq!(ComplexMatrix::zeros(0), Err(MatrixError::NotPowerOfTwo(0)));
        assert!(ComplexMatrix::zeros(1).is_ok());
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let a = ComplexMatrix::identity(2).unwrap();
        let b = ComplexMatrix::identity(4).unwrap();
        assert!(a.kron(&b).approx_eq_default(&ComplexMatrix::identity(8).unwrap()));
    }

    #[test]
    fn mul_matches_hand_computation() {
        let a = ComplexMatrix::from_flat(2, vec![c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)])
            .unwrap();
        let b = ComplexMatrix::from_flat(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)])
            .unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab[(0, 0)], c(0.0, 1.0) + c(1.0, 0.0) * c(0.0, -1.0));
        assert_eq!(ab[(0, 1)], c(1.0, 0.0));
        assert_eq!(ab[(1, 0)], c(2.0, 0.0) * c(0.0, -1.0));
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = ComplexMatrix::from_flat(2, vec![c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)])
            .unwrap();
        let ad = a.adjoint();
        assert_eq!(ad[(0, 1)], c(5.0, -6.0));
        assert_eq!(ad[(1, 0)], c(3.0, -4.0));
    }

    #[test]
    fn trace_sums_diagonal() {
        let a = ComplexMatrix::from_real(2, &[0.25, 0.0, 0.0, 0.75]).unwrap();
        assert_eq!(a.trace(), c(1.0, 0.0));
    }
}
