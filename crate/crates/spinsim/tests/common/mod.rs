//! Test-only oracles, independent of the library's computational paths:
//! a cyclic Jacobi eigensolver for Hermitian matrices and the dense
//! eigenbasis exponential built on it.

#![allow(dead_code)]

use spinsim::{Complex64, ComplexMatrix};

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian
/// matrix, by cyclic Jacobi rotations.
pub fn jacobi_hermitian(mat: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = mat.dim();
    let mut a = mat.clone();
    let mut v = ComplexMatrix::identity(d).expect("valid dim");
    let scale = mat.max_abs().max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-16 * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Embedded 2x2 rotation zeroing a[(p,q)].
                let mut u = ComplexMatrix::identity(d).expect("valid dim");
                u[(p, p)] = Complex64::new(c, 0.0);
                u[(q, q)] = Complex64::new(c, 0.0);
                u[(p, q)] = phase * s;
                u[(q, p)] = -phase.conj() * s;

                a = u.adjoint().mul(&a).unwrap().mul(&u).unwrap();
                v = v.mul(&u).unwrap();
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(d).expect("valid dim");
    for (col, &src) in order.iter().enumerate() {
        for row in 0..d {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    (eigenvalues, vectors)
}

/// exp(-i*H*t) through the eigenbasis of the dense Hermitian matrix H.
pub fn eigen_exponential(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (eigenvalues, v) = jacobi_hermitian(h);
    let phases: Vec<Complex64> = eigenvalues
        .iter()
        .map(|&e| Complex64::new(0.0, -e * t).exp())
        .collect();
    let d = ComplexMatrix::from_diag(&phases).expect("valid dim");
    v.mul(&d).unwrap().mul(&v.adjoint()).unwrap()
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn sorted_eigenvalues(mat: &ComplexMatrix) -> Vec<f64> {
    jacobi_hermitian(mat).0
}
