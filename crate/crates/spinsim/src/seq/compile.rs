//! Compile a pulse sequence against a spin system into propagators.
//!
//! Rotation sense: the language compiles every element with the conjugate
//! sense of the operator module, i.e. a pulse `[a]x` or `[a]y` becomes
//! exp(+i*a*I_axis) and a delay becomes exp(+i*H*t). The choice is global
//! and anti-unitary (all observables are unchanged); it is the sense under
//! which the standard entangling sequences reproduce the textbook
//! product-operator matrices verbatim in this crate's basis convention
//! (|up> = 0, spin 1 leftmost). Concretely, rotations carry negated angles
//! and evolutions negated energy diagonals.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::density::{DensityMatrix, StateError};
use crate::matrix::ComplexMatrix;
use crate::nmr::energies_with_mask;
use crate::operators::{diagonal_propagator, rotation, Axis, OperatorError};
use crate::system::{SpinSystem, SystemError};

use super::ast::{AngleExpr, DelaySpec, PulseSequence, SequenceElement};

/// Values for the free symbols of a sequence: radians for angles, seconds
/// for delays.
pub type Binding = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("unbound symbol {0:?}")]
    UnboundSymbol(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("coupling J({a},{b}) = {hz} Hz cannot define a delay")]
    NonPositiveCoupling { a: String, b: String, hz: f64 },
    #[error("delay duration {0} s is negative")]
    NegativeDelay(f64),
    #[error("decouple({0} off) without a matching on")]
    DecoupleOffWithoutOn(String),
    #[error("decouple({0} on) is already active")]
    DecoupleAlreadyOn(String),
    #[error("refocusing pulse has no targets: every spin is decoupled")]
    AllSpinsDecoupled,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// An executable evolution step: a rotation on a target subset or a diagonal
/// phase evolution. All in-scope Hamiltonians are diagonal in the Iz product
/// basis, so these two forms cover every compiled sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Propagator {
    /// exp(-i*angle*I_axis) applied to every target (1-based spin indices).
    Rotation {
        angle: f64,
        axis: Axis,
        targets: Vec<usize>,
    },
    /// exp(-i*H*duration) with diagonal H given in rad/s.
    Evolution { energies: Vec<f64>, duration: f64 },
}

impl Propagator {
    pub fn to_matrix(&self, n: usize) -> Result<ComplexMatrix, OperatorError> {
        match self {
            Propagator::Rotation { angle, axis, targets } => rotation(*angle, *axis, targets, n),
            Propagator::Evolution { energies, duration } => {
                diagonal_propagator(energies, *duration)
            }
        }
    }
}

/// Compile `seq` for `sys`, with `bind` supplying every free symbol.
///
/// Pulses become rotations (with the y-sense convention above); delays
/// become diagonal evolutions with all terms touching currently decoupled
/// spins removed; `refocus(d)` expands to evolution for d/2, a hard pi pulse
/// along x on every non-decoupled spin, and evolution for d/2. Compilation
/// is deterministic: identical inputs give identical propagators.
pub fn compile(
    seq: &PulseSequence,
    sys: &SpinSystem,
    bind: &Binding,
) -> Result<Vec<Propagator>, CompileError> {
    let n = sys.spin_count();
    let mut decoupled = vec![false; n];
    let mut out = Vec::new();

    for el in seq.elements() {
        match el {
            SequenceElement::Pulse { angle, axis, targets } => {
                let value = eval_angle(angle, bind)?;
                let mut spins: Vec<usize> = targets
                    .iter()
                    .map(|l| sys.resolve_label(l).map(|i| i + 1))
                    .collect::<Result<_, _>>()?;
                spins.sort_unstable();
                out.push(Propagator::Rotation {
                    angle: -value,
                    axis: *axis,
                    targets: spins,
                });
            }
            SequenceElement::Delay(spec) => {
                let duration = eval_delay(spec, sys, bind)?;
                out.push(Propagator::Evolution {
                    energies: conjugate_sense(energies_with_mask(sys, &decoupled)),
                    duration,
                });
            }
            SequenceElement::Refocus(spec) => {
                let duration = eval_delay(spec, sys, bind)?;
                let energies = conjugate_sense(energies_with_mask(sys, &decoupled));
                let targets: Vec<usize> = (0..n).filter(|&i| !decoupled[i]).map(|i| i + 1).collect();
                if targets.is_empty() {
                    return Err(CompileError::AllSpinsDecoupled);
                }
                out.push(Propagator::Evolution {
                    energies: energies.clone(),
                    duration: duration / 2.0,
                });
                out.push(Propagator::Rotation {
                    angle: -std::f64::consts::PI,
                    axis: Axis::X,
                    targets,
                });
                out.push(Propagator::Evolution {
                    energies,
                    duration: duration / 2.0,
                });
            }
            SequenceElement::Decouple { spin, on } => {
                let i = sys.resolve_label(spin)?;
                if *on {
                    if decoupled[i] {
                        return Err(CompileError::DecoupleAlreadyOn(spin.clone()));
                    }
                    decoupled[i] = true;
                } else {
                    if !decoupled[i] {
                        return Err(CompileError::DecoupleOffWithoutOn(spin.clone()));
                    }
                    decoupled[i] = false;
                }
            }
        }
    }
    Ok(out)
}

/// Apply compiled propagators to a state, in order.
pub fn apply_propagators(
    props: &[Propagator],
    rho: &DensityMatrix,
) -> Result<DensityMatrix, CompileError> {
    let n = rho.spin_count();
    let mut state = rho.clone();
    for p in props {
        state = state.conjugate(&p.to_matrix(n)?)?;
    }
    Ok(state)
}

/// exp(+i*H*t) realized as exp(-i*(-H)*t).
fn conjugate_sense(mut energies: Vec<f64>) -> Vec<f64> {
    for e in &mut energies {
        *e = -*e;
    }
    energies
}

fn eval_angle(angle: &AngleExpr, bind: &Binding) -> Result<f64, CompileError> {
    Ok(match angle {
        AngleExpr::Pi { num, den } => *num as f64 * std::f64::consts::PI / *den as f64,
        AngleExpr::Deg(v) => v.to_radians(),
        AngleExpr::Rad(v) => *v,
        AngleExpr::Sym(s) => *bind
            .get(s)
            .ok_or_else(|| CompileError::UnboundSymbol(s.clone()))?,
    })
}

fn eval_delay(spec: &DelaySpec, sys: &SpinSystem, bind: &Binding) -> Result<f64, CompileError> {
    let t = match spec {
        DelaySpec::CouplingQuarter { a, b } => {
            let ia = sys.resolve_label(a)?;
            let ib = sys.resolve_label(b)?;
            let hz = sys.j_hz(ia, ib);
            if hz <= 0.0 {
                return Err(CompileError::NonPositiveCoupling {
                    a: a.clone(),
                    b: b.clone(),
                    hz,
                });
            }
            1.0 / (4.0 * hz)
        }
        DelaySpec::FixedMs(ms) => ms / 1000.0,
        DelaySpec::Sym(s) => *bind
            .get(s)
            .ok_or_else(|| CompileError::UnboundSymbol(s.clone()))?,
    };
    if t < 0.0 {
        return Err(CompileError::NegativeDelay(t));
    }
    Ok(t)
}
