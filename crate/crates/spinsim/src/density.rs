//! Density matrices for spin ensembles.
//!
//! Two kinds of state are distinguished. A `TrueState` is a physical density
//! matrix: Hermitian, unit trace, positive semidefinite. A `Deviation` is the
//! NMR convention for the observable part of a state with constant factors
//! dropped; it is Hermitian but its trace may be any real value.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;

/// Tolerance for Hermiticity and trace checks at construction.
pub const STATE_TOL: f64 = 1e-10;
/// A true state may have eigenvalues down to this floor (rounding slack).
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    TrueState,
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace {0:.12} is not 1 within tolerance")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (pivot {0:.3e})")]
    NotPositive(f64),
    #[error("state vector norm {0:.12} is not 1 within tolerance")]
    NotNormalized(f64),
    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: state {0}, operator {1}")]
    DimMismatch(usize, usize),
    #[error("keep set is empty")]
    EmptyKeepSet,
    #[error("spin index {spin} out of range for {n} spins")]
    SpinOutOfRange { spin: usize, n: usize },
    #[error("duplicate spin index {0}")]
    DuplicateSpin(usize),
    #[error(transparent)]
    Matrix(#[from] crate::matrix::MatrixError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    kind: StateKind,
}

impl DensityMatrix {
    /// Validate and wrap a physical density matrix (Hermitian, trace 1, PSD).
    pub fn true_state(mat: ComplexMatrix) -> Result<Self, StateError> {
        check_hermitian(&mat)?;
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(StateError::TraceNotOne(tr));
        }
        check_psd(&mat)?;
        Ok(Self {
            mat,
            kind: StateKind::TrueState,
        })
    }

    /// Wrap a deviation matrix: Hermitian, arbitrary real trace.
    pub fn deviation(mat: ComplexMatrix) -> Result<Self, StateError> {
        check_hermitian(&mat)?;
        Ok(Self {
            mat,
            kind: StateKind::Deviation,
        })
    }

    /// Projector onto a normalized pure state. Positivity holds by
    /// construction, so only the norm is checked.
    pub fn from_pure(state: &[Complex64]) -> Result<Self, StateError> {
        let dim = state.len();
        let norm_sq: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized(norm_sq.sqrt()));
        }
        let mut mat = ComplexMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = state[i] * state[j].conj();
            }
        }
        Ok(Self {
            mat,
            kind: StateKind::TrueState,
        })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn spin_count(&self) -> usize {
        self.mat.spin_count()
    }

    /// Trace as a real number (the imaginary part vanishes for Hermitian input).
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Tr(rho^2); equals 1 exactly for pure true states.
    pub fn purity(&self) -> f64 {
        self.mat.mul(&self.mat).expect("same dim").trace().re
    }

    /// Rescale by a real factor. The result is a deviation matrix: rescaling
    /// discards the unit-trace normalization.
    pub fn scaled(&self, factor: f64) -> DensityMatrix {
        DensityMatrix {
            mat: self.mat.scale(Complex64::new(factor, 0.0)),
            kind: StateKind::Deviation,
        }
    }

    /// Traceless part: rho minus (tr rho / dim) times the identity.
    pub fn traceless(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(self.dim()).expect("valid dim");
        self.mat
            .sub(&id.scale(Complex64::new(self.trace() / self.dim() as f64, 0.0)))
            .expect("same dim")
    }

    /// Unitary conjugation rho -> U rho U†. Preserves kind, trace,
    /// Hermiticity, and the eigenvalue multiset.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self, StateError> {
        if u.dim() != self.dim() {
            return Err(StateError::DimMismatch(self.dim(), u.dim()));
        }
        let gram = u.adjoint().mul(u).expect("same dim");
        let id = ComplexMatrix::identity(u.dim()).expect("valid dim");
        let dev = gram.max_abs_diff(&id);
        if dev > STATE_TOL {
            return Err(StateError::NotUnitary(dev));
        }
        let mat = u.mul(&self.mat).expect("same dim").mul(&u.adjoint()).expect("same dim");
        Ok(Self { mat, kind: self.kind })
    }

    /// Partial trace onto the listed spins (1-based, leftmost spin is 1).
    /// Kept spins retain their relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, StateError> {
        let n = self.spin_count();
        if keep.is_empty() {
            return Err(StateError::EmptyKeepSet);
        }
        let mut seen = vec![false; n + 1];
        for &s in keep {
            if s == 0 || s > n {
                return Err(StateError::SpinOutOfRange { spin: s, n });
            }
            if seen[s] {
                return Err(StateError::DuplicateSpin(s));
            }
            seen[s] = true;
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();

        let k = kept.len();
        let out_dim = 1usize << k;
        let mut out = ComplexMatrix::zeros(out_dim)?;

        // Spin s occupies bit (n - s) of a basis index.
        let kept_bits: Vec<usize> = kept.iter().map(|&s| n - s).collect();
        let env_bits: Vec<usize> = (0..n)
            .map(|s| n - 1 - s)
            .filter(|b| !kept_bits.contains(b))
            .collect();

        let env_count = 1usize << env_bits.len();
        let expand_env = |e: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &b) in env_bits.iter().enumerate() {
                if e >> pos & 1 == 1 {
                    idx |= 1 << b;
                }
            }
            idx
        };

        let expand_kept = |r: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &b) in kept_bits.iter().enumerate() {
                if r >> (k - 1 - pos) & 1 == 1 {
                    idx |= 1 << b;
                }
            }
            idx
        };

        for r in 0..out_dim {
            for c in 0..out_dim {
                let (ri, ci) = (expand_kept(r), expand_kept(c));
                let mut acc = Complex64::ZERO;
                for e in 0..env_count {
                    let env = expand_env(e);
                    acc += self.mat[(ri | env, ci | env)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Self {
            mat: out,
            kind: self.kind,
        })
    }
}

fn check_hermitian(mat: &ComplexMatrix) -> Result<(), StateError> {
    let d = mat.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    if worst > STATE_TOL {
        return Err(StateError::NotHermitian(worst));
    }
    Ok(())
}

/// Positive-semidefiniteness within the eigenvalue floor, via an LDL†
/// factorization of mat + |floor|·I. No eigendecomposition is needed.
fn check_psd(mat: &ComplexMatrix) -> Result<(), StateError> {
    let d = mat.dim();
    let scale = 1.0 + mat.max_abs();
    let shift = -EIGENVALUE_FLOOR;
    let mut a: Vec<Complex64> = mat.data().to_vec();
    for i in 0..d {
        a[i * d + i] += Complex64::new(shift, 0.0);
    }
    let mut l = vec![Complex64::ZERO; d * d];
    let mut diag = vec![0.0f64; d];
    for k in 0..d {
        let mut dk = a[k * d + k].re;
        for j in 0..k {
            dk -= l[k * d + j].norm_sqr() * diag[j];
        }
        if dk < -1e-12 * scale {
            return Err(StateError::NotPositive(dk));
        }
        diag[k] = dk;
        let negligible = dk <= 1e-14 * scale;
        for i in (k + 1)..d {
            let mut v = a[i * d + k];
            for j in 0..k {
                v -= l[i * d + j] * l[k * d + j].conj() * diag[j];
            }
            if negligible {
                // Zero pivot: the rest of the column must vanish too.
                if v.norm() > 1e-6 * scale {
                    return Err(StateError::NotPositive(dk));
                }
                l[i * d + k] = Complex64::ZERO;
            } else {
                l[i * d + k] = v / dk;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DEFAULT_TOL;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn true_state_accepts_maximally_mixed() {
        let m = ComplexMatrix::from_real(4, &[
            0.25, 0.0, 0.0, 0.0, //
            0.0, 0.25, 0.0, 0.0, //
            0.0, 0.0, 0.25, 0.0, //
            0.0, 0.0, 0.0, 0.25,
        ])
        .unwrap();
        let rho = DensityMatrix::true_state(m).unwrap();
        assert_eq!(rho.kind(), StateKind::TrueState);
        assert!((rho.purity() - 0.25).abs() < DEFAULT_TOL);
    }

    #[test]
    fn true_state_rejects_bad_trace() {
        let m = ComplexMatrix::from_real(2, &[0.7, 0.0, 0.0, 0.7]).unwrap();
        assert!(matches!(
            DensityMatrix::true_state(m),
            Err(StateError::TraceNotOne(_))
        ));
    }

    #[test]
    fn true_state_rejects_negative_eigenvalue() {
        // Eigenvalues 1.2 and -0.2.
        let m = ComplexMatrix::from_real(2, &[0.5, 0.7, 0.7, 0.5]).unwrap();
        assert!(matches!(
            DensityMatrix::true_state(m),
            Err(StateError::NotPositive(_))
        ));
    }

    #[test]
    fn true_state_rejects_non_hermitian() {
        let m = ComplexMatrix::from_flat(2, vec![c(0.5, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.5, 0.0)])
            .unwrap();
        assert!(matches!(
            DensityMatrix::true_state(m),
            Err(StateError::NotHermitian(_))
        ));
    }

    #[test]
    fn deviation_allows_arbitrary_trace() {
        let m = ComplexMatrix::from_real(2, &[1.0, -0.3, -0.3, 1.0]).unwrap();
        let rho = DensityMatrix::deviation(m).unwrap();
        assert_eq!(rho.kind(), StateKind::Deviation);
        assert!((rho.trace() - 2.0).abs() < DEFAULT_TOL);
    }

    #[test]
    fn from_pure_rejects_unnormalized() {
        assert!(matches!(
            DensityMatrix::from_pure(&[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(StateError::NotNormalized(_))
        ));
    }

    #[test]
    fn conjugate_by_identity_is_identity_map() {
        let rho = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let u = ComplexMatrix::identity(2).unwrap();
        let out = rho.conjugate(&u).unwrap();
        assert!(out.mat().approx_eq_default(rho.mat()));
        assert_eq!(out.kind(), StateKind::TrueState);
    }

    #[test]
    fn conjugate_rejects_non_unitary() {
        let rho = DensityMatrix::from_pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let u = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(matches!(rho.conjugate(&u), Err(StateError::NotUnitary(_))));
    }

    #[test]
    fn partial_trace_of_product_recovers_left_factor() {
        // rho_a (x) rho_b with rho_b of unit trace.
        let a = DensityMatrix::from_pure(&[c(0.8, 0.0), c(0.6, 0.0)]).unwrap();
        let b = ComplexMatrix::from_real(2, &[0.3, 0.0, 0.0, 0.7]).unwrap();
        let joint = DensityMatrix::true_state(a.mat().kron(&b)).unwrap();
        let red = joint.partial_trace(&[1]).unwrap();
        assert!(red.mat().approx_eq_default(a.mat()));
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
            .unwrap();
        let red = bell.partial_trace(&[1]).unwrap();
        let half = ComplexMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(red.mat().approx_eq_default(&half));
    }

    #[test]
    fn partial_trace_keeping_everything_is_identity() {
        let rho = DensityMatrix::from_pure(&[c(0.0, 0.0), c(0.6, 0.0), c(0.8, 0.0), c(0.0, 0.0)])
            .unwrap();
        let out = rho.partial_trace(&[1, 2]).unwrap();
        assert!(out.mat().approx_eq_default(rho.mat()));
    }

    #[test]
    fn partial_trace_rejects_empty_and_out_of_range() {
        let rho = DensityMatrix::from_pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(rho.partial_trace(&[]), Err(StateError::EmptyKeepSet)));
        assert!(matches!(
            rho.partial_trace(&[2]),
            Err(StateError::SpinOutOfRange { .. })
        ));
    }

    #[test]
    fn partial_trace_preserves_spin_order() {
        // Distinguishable marginals: spin 2 up, spin 3 down, across a 3-spin
        // product state. Keeping {2,3} must give |up,down> in that order.
        let up = [c(1.0, 0.0), c(0.0, 0.0)];
        let down = [c(0.0, 0.0), c(1.0, 0.0)];
        let mix = [c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.0, std::f64::consts::FRAC_1_SQRT_2)];
        let mut state = Vec::new();
        for &a in &mix {
            for &b in &up {
                for &c_ in &down {
                    state.push(a * b * c_);
                }
            }
        }
        let rho = DensityMatrix::from_pure(&state).unwrap();
        let red = rho.partial_trace(&[2, 3]).unwrap();
        // |up,down><up,down| = basis index 1 of 4.
        assert!((red.mat()[(1, 1)].re - 1.0).abs() < DEFAULT_TOL);
    }
}
