//! Physical layer: rotating-frame Hamiltonian diagonals, initial states,
//! decoupled acquisition, and spectral peak amplitudes.

use num_complex::Complex64;
use thiserror::Error;

use crate::density::{DensityMatrix, StateError};
use crate::matrix::ComplexMatrix;
use crate::system::{SpinSystem, SystemError};

/// Receiver phase applied to every detected amplitude. Chosen so that the
/// product-state preparation yields real, non-negative peak amplitudes.
pub const RECEIVER_PHASE: Complex64 = Complex64::new(-1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmrError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("spin count must be at least 1")]
    NoSpins,
    #[error("environment must contain at least one spin")]
    NoEnvironment,
    #[error("observed and partner spin coincide ({0:?})")]
    LabelCollision(String),
    #[error("state dimension {dim} does not match a {spins}-spin system")]
    WrongDimension { dim: usize, spins: usize },
    #[error("cannot decouple every spin")]
    DecoupleAll,
}

/// Diagonal of the rotating-frame Hamiltonian
/// H = sum_i dω_i Iz(i) + sum_{i<j} 2πJ_ij Iz(i)Iz(j), in rad/s,
/// with every term that touches an excluded (decoupled) spin removed.
pub fn zeeman_coupling_energies(
    sys: &SpinSystem,
    excluded: &[&str],
) -> Result<Vec<f64>, NmrError> {
    let mut mask = vec![false; sys.spin_count()];
    for label in excluded {
        mask[sys.resolve_label(label)?] = true;
    }
    Ok(energies_with_mask(sys, &mask))
}

/// Same as [`zeeman_coupling_energies`], with excluded spins given as a
/// boolean mask over 0-based spin indices.
#[allow(clippy::needless_range_loop)]
pub fn energies_with_mask(sys: &SpinSystem, excluded: &[bool]) -> Vec<f64> {
    let n = sys.spin_count();
    let dim = 1usize << n;
    // m_z = +1/2 for |up> (bit 0), -1/2 for |down> (bit 1).
    let mz = |basis: usize, spin: usize| -> f64 {
        if basis >> (n - 1 - spin) & 1 == 0 {
            0.5
        } else {
            -0.5
        }
    };
    let tau = std::f64::consts::TAU;
    let mut energies = vec![0.0; dim];
    for (b, e) in energies.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            if excluded[i] {
                continue;
            }
            acc += tau * sys.offset_hz(i) * mz(b, i);
            for j in (i + 1)..n {
                if excluded[j] {
                    continue;
                }
                acc += tau * sys.j_hz(i, j) * mz(b, i) * mz(b, j);
            }
        }
        *e = acc;
    }
    energies
}

/// Projector onto |down>^(x)n, the pseudo-pure starting state.
pub fn pseudo_pure_down(n: usize) -> Result<DensityMatrix, NmrError> {
    if n == 0 {
        return Err(NmrError::NoSpins);
    }
    let dim = 1usize << n;
    let mut state = vec![Complex64::ZERO; dim];
    state[dim - 1] = Complex64::ONE;
    Ok(DensityMatrix::from_pure(&state)?)
}

/// Append `env_count` maximally mixed spins: rho -> rho (x) (1/2)^(x)env_count.
pub fn environment_mixed(
    rho_sys: &DensityMatrix,
    env_count: usize,
) -> Result<DensityMatrix, NmrError> {
    if env_count == 0 {
        return Err(NmrError::NoEnvironment);
    }
    let env_dim = 1usize << env_count;
    let mixed = ComplexMatrix::identity(env_dim)
        .expect("power of two")
        .scale(Complex64::new(1.0 / env_dim as f64, 0.0));
    let mat = rho_sys.mat().kron(&mixed);
    Ok(match rho_sys.kind() {
        crate::density::StateKind::TrueState => DensityMatrix::true_state(mat)?,
        crate::density::StateKind::Deviation => DensityMatrix::deviation(mat)?,
    })
}

/// Decoupling a spin during acquisition traces it out of the state.
/// `rho` covers the full system; the result covers the remaining spins.
pub fn acquire_decoupled(
    rho: &DensityMatrix,
    sys: &SpinSystem,
    decoupled: &[&str],
) -> Result<DensityMatrix, NmrError> {
    let n = sys.spin_count();
    if rho.spin_count() != n {
        return Err(NmrError::WrongDimension {
            dim: rho.dim(),
            spins: n,
        });
    }
    if decoupled.is_empty() {
        return Ok(rho.clone());
    }
    let mut drop = vec![false; n];
    for label in decoupled {
        drop[sys.resolve_label(label)?] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !drop[i]).map(|i| i + 1).collect();
    if keep.is_empty() {
        return Err(NmrError::DecoupleAll);
    }
    Ok(rho.partial_trace(&keep)?)
}

/// The two doublet components of one observed spin, split by a coupling
/// partner's |up>/|down> state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPair {
    pub low: Complex64,
    pub high: Complex64,
}

impl PeakPair {
    pub fn sum(&self) -> Complex64 {
        self.low + self.high
    }
}

/// Stick amplitudes of the observed spin's doublet:
/// low  = phase * Tr(rho · I-(observed) (x) P_up(partner)),
/// high = phase * Tr(rho · I-(observed) (x) P_down(partner)),
/// with the fixed [`RECEIVER_PHASE`].
///
/// `rho` must already be reduced to the (observed, partner) pair; spins keep
/// their system order in the reduced state.
pub fn peak_amplitudes(
    rho: &DensityMatrix,
    sys: &SpinSystem,
    observed: &str,
    partner: &str,
) -> Result<PeakPair, NmrError> {
    let oi = sys.resolve_label(observed)?;
    let pi = sys.resolve_label(partner)?;
    if oi == pi {
        return Err(NmrError::LabelCollision(observed.to_string()));
    }
    if rho.dim() != 4 {
        return Err(NmrError::WrongDimension {
            dim: rho.dim(),
            spins: 2,
        });
    }
    // Positions within the reduced two-spin state follow system order.
    let observed_first = oi < pi;

    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    // Lowering operator |down><up| and the partner-state projectors.
    let lower = ComplexMatrix::from_flat(2, vec![z, z, one, z]).expect("2x2");
    let p_up = ComplexMatrix::from_flat(2, vec![one, z, z, z]).expect("2x2");
    let p_down = ComplexMatrix::from_flat(2, vec![z, z, z, one]).expect("2x2");

    let trace_with = |proj: &ComplexMatrix| -> Complex64 {
        let op = if observed_first {
            lower.kron(proj)
        } else {
            proj.kron(&lower)
        };
        rho.mat().mul(&op).expect("same dim").trace() * RECEIVER_PHASE
    };
    Ok(PeakPair {
        low: trace_with(&p_up),
        high: trace_with(&p_down),
    })
}
