//! Spin-1/2 operators and the unitaries built from them.
//!
//! Conventions, fixed crate-wide:
//! - basis order |up> -> index 0, |down> -> index 1;
//! - spin 1 is the leftmost (most significant) tensor factor;
//! - `rotation` implements exp(-i*angle*I_axis), i.e.
//!   cos(angle/2)·1 - 2i·sin(angle/2)·I_axis on each target spin;
//! - `cnot` flips the target when the control is |down>.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("spin {spin} out of range for {n} spins")]
    SpinOutOfRange { spin: usize, n: usize },
    #[error("operator must be 2x2, got {0}x{0}")]
    NotSingleSpin(usize),
    #[error("target set is empty")]
    EmptyTargets,
    #[error("duplicate target spin {0}")]
    DuplicateTarget(usize),
    #[error("control and target coincide (spin {0})")]
    ControlEqualsTarget(usize),
    #[error("energy vector length {0} is not a power of two")]
    BadEnergyCount(usize),
    #[error("negative evolution time {0}")]
    NegativeTime(f64),
}

/// The three angular-momentum components of a single spin 1/2.
#[derive(Debug, Clone)]
pub struct SpinOperatorTriple {
    pub ix: ComplexMatrix,
    pub iy: ComplexMatrix,
    pub iz: ComplexMatrix,
}

/// Ix, Iy, Iz for one spin (entries ±1/2, ±i/2; eigenvalues ±1/2; trace 0).
pub fn spin_half() -> SpinOperatorTriple {
    let z = Complex64::ZERO;
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    SpinOperatorTriple {
        ix: ComplexMatrix::from_flat(2, vec![z, h, h, z]).expect("2x2"),
        iy: ComplexMatrix::from_flat(2, vec![z, -ih, ih, z]).expect("2x2"),
        iz: ComplexMatrix::from_flat(2, vec![h, z, z, -h]).expect("2x2"),
    }
}

/// Embed a single-spin operator at position `target` (1-based) of an n-spin
/// space: identity on every other factor.
pub fn embed(op: &ComplexMatrix, target: usize, n: usize) -> Result<ComplexMatrix, OperatorError> {
    if op.dim() != 2 {
        return Err(OperatorError::NotSingleSpin(op.dim()));
    }
    if target == 0 || target > n {
        return Err(OperatorError::SpinOutOfRange { spin: target, n });
    }
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim).expect("power of two");
    let bit = n - target;
    for i in 0..dim {
        let ib = i >> bit & 1;
        let base = i & !(1 << bit);
        for jb in 0..2 {
            let v = op[(ib, jb)];
            if v != Complex64::ZERO {
                out[(i, base | (jb << bit))] = v;
            }
        }
    }
    Ok(out)
}

/// Single-spin rotation matrix exp(-i*angle*I_axis).
fn rotation_2x2(angle: f64, axis: Axis) -> ComplexMatrix {
    let ops = spin_half();
    let gen = match axis {
        Axis::X => ops.ix,
        Axis::Y => ops.iy,
    };
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -2.0 * (angle / 2.0).sin());
    ComplexMatrix::identity(2)
        .expect("2x2")
        .scale(c)
        .add(&gen.scale(s))
        .expect("same dim")
}

/// Simultaneous rotation exp(-i*angle*I_axis) on every target spin.
pub fn rotation(
    angle: f64,
    axis: Axis,
    targets: &[usize],
    n: usize,
) -> Result<ComplexMatrix, OperatorError> {
    if targets.is_empty() {
        return Err(OperatorError::EmptyTargets);
    }
    let mut seen = vec![false; n + 1];
    for &t in targets {
        if t == 0 || t > n {
            return Err(OperatorError::SpinOutOfRange { spin: t, n });
        }
        if seen[t] {
            return Err(OperatorError::DuplicateTarget(t));
        }
        seen[t] = true;
    }
    let r = rotation_2x2(angle, axis);
    let mut out = ComplexMatrix::identity(1usize << n).expect("power of two");
    for &t in targets {
        out = embed(&r, t, n)?.mul(&out).expect("same dim");
    }
    Ok(out)
}

/// Controlled-NOT: flips `target` when `control` is |down>.
pub fn cnot(control: usize, target: usize, n: usize) -> Result<ComplexMatrix, OperatorError> {
    if control == target {
        return Err(OperatorError::ControlEqualsTarget(control));
    }
    for &s in &[control, target] {
        if s == 0 || s > n {
            return Err(OperatorError::SpinOutOfRange { spin: s, n });
        }
    }
    let dim = 1usize << n;
    let cbit = n - control;
    let tbit = n - target;
    let mut out = ComplexMatrix::zeros(dim).expect("power of two");
    for i in 0..dim {
        let j = if i >> cbit & 1 == 1 { i ^ (1 << tbit) } else { i };
        out[(j, i)] = Complex64::ONE;
    }
    Ok(out)
}

/// Diagonal unitary exp(-i*H*t) for a diagonal Hamiltonian given by its
/// 2^n real eigenvalues in rad/s.
pub fn diagonal_propagator(
    diag_energies: &[f64],
    t: f64,
) -> Result<ComplexMatrix, OperatorError> {
    if diag_energies.is_empty() || !diag_energies.len().is_power_of_two() {
        return Err(OperatorError::BadEnergyCount(diag_energies.len()));
    }
    if t < 0.0 {
        return Err(OperatorError::NegativeTime(t));
    }
    let diag: Vec<Complex64> = diag_energies
        .iter()
        .map(|&e| Complex64::new(0.0, -e * t).exp())
        .collect();
    Ok(ComplexMatrix::from_diag(&diag).expect("power of two"))
}
