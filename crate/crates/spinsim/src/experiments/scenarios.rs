//! Decoherence scenario runners: a one-qubit system entangled with 1..N
//! environment spins through a gate network, and a two-spin double-quantum
//! state dephasing under its couplings to environment spins.
//!
//! Closed forms and brute-force simulations are kept side by side so each
//! can check the other. Reduced states are reported in the unit-diagonal
//! normalization (twice the trace-1 reduced matrix) wherever a closed-form
//! pattern is quoted.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::density::{DensityMatrix, StateError};
use crate::matrix::{ComplexMatrix, MatrixError};
use crate::nmr::{acquire_decoupled, environment_mixed, pseudo_pure_down, NmrError};
use crate::operators::{cnot, rotation, Axis, OperatorError};
use crate::seq::{
    apply_propagators, compile, parse, AngleExpr, Binding, CompileError, DelaySpec, PulseSequence,
    SequenceElement, SequenceError, SyntaxError,
};
use crate::system::{SpinSystem, SystemError};

/// Dense brute force caps out at 12 spins (4096-dimensional matrices).
pub const MAX_SPINS: usize = 12;

pub const BELLPREP_SEQ: &str = include_str!("../../sequences/bellprep.seq");
pub const ENTANGLE_SEQ: &str = include_str!("../../sequences/entangle.seq");
pub const PRODUCT_SEQ: &str = include_str!("../../sequences/product.seq");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("environment spin count {got} outside supported range 1..={max}")]
    EnvCountOutOfRange { got: usize, max: usize },
    #[error("evolution time {0} s is negative")]
    NegativeTime(f64),
    #[error("scenario needs a system with at least {0} spins")]
    SystemTooSmall(usize),
    #[error(transparent)]
    Nmr(#[from] NmrError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Walsh-Hadamard on one spin of an n-spin register, realized as the pulse
/// composition [pi]x then [pi/2] about -y (equal to H up to a global phase).
pub fn hadamard_gate(target: usize, n: usize) -> Result<ComplexMatrix, OperatorError> {
    let flip = rotation(PI, Axis::X, &[target], n)?;
    let tilt = rotation(-FRAC_PI_2, Axis::Y, &[target], n)?;
    Ok(tilt.mul(&flip).expect("same dim"))
}

/// Environment rotation R(theta): takes |down> to
/// cos(theta/2)|up> + sin(theta/2)|down>, with real amplitudes.
pub fn environment_rotation(
    theta: f64,
    target: usize,
    n: usize,
) -> Result<ComplexMatrix, OperatorError> {
    rotation(theta - PI, Axis::Y, &[target], n)
}

/// Joint two-spin state of the entangling network:
/// H on spin 1, R(theta) on spin 2, then CNOT (control 1, trigger on down).
pub fn entangled_pair_state(theta: f64) -> DensityMatrix {
    let rho = pseudo_pure_down(2).expect("two spins");
    let h = hadamard_gate(1, 2).expect("valid gate");
    let r = environment_rotation(theta, 2, 2).expect("valid gate");
    let cx = cnot(1, 2, 2).expect("valid gate");
    rho.conjugate(&h)
        .and_then(|s| s.conjugate(&r))
        .and_then(|s| s.conjugate(&cx))
        .expect("unitary pipeline")
}

/// Same network without the CNOT: the spins stay in a product state.
pub fn product_pair_state(theta: f64) -> DensityMatrix {
    let rho = pseudo_pure_down(2).expect("two spins");
    let h = hadamard_gate(1, 2).expect("valid gate");
    let r = environment_rotation(theta, 2, 2).expect("valid gate");
    rho.conjugate(&h)
        .and_then(|s| s.conjugate(&r))
        .expect("unitary pipeline")
}

#[derive(Debug, Clone)]
pub struct OneQubitOutcome {
    /// Reduced system state in unit-diagonal normalization.
    pub rho_reduced: DensityMatrix,
    /// Off-diagonal element (0,1) of `rho_reduced`; equals -sin(theta).
    pub coherence: Complex64,
}

/// Entangle one system spin with one environment spin and trace the
/// environment out. The reduced coherence is -sin(theta).
pub fn scenario_one_qubit(theta: f64) -> OneQubitOutcome {
    let joint = entangled_pair_state(theta);
    let reduced = joint.partial_trace(&[1]).expect("valid keep set");
    let rho_reduced = reduced.scaled(2.0);
    let coherence = rho_reduced.mat()[(0, 1)];
    OneQubitOutcome {
        rho_reduced,
        coherence,
    }
}

#[derive(Debug, Clone)]
pub struct NEnvOutcome {
    /// Closed form -sin^N(theta).
    pub coherence_closed: f64,
    /// Reduced coherence from the full (N+1)-spin simulation.
    pub coherence_bruteforce: Complex64,
}

/// Entangle the system spin with `n_env` environment spins one at a time
/// (R(theta) then CNOT per spin) and compare the reduced coherence against
/// the closed form -sin^N(theta).
pub fn scenario_n_environment(theta: f64, n_env: usize) -> Result<NEnvOutcome, ScenarioError> {
    if n_env < 1 || n_env + 1 > MAX_SPINS {
        return Err(ScenarioError::EnvCountOutOfRange {
            got: n_env,
            max: MAX_SPINS - 1,
        });
    }
    let n = n_env + 1;
    let dim = 1usize << n;

    // Full-register simulation on the state vector; the joint density
    // matrix is still formed in full before the partial trace. Gates are
    // built and applied one at a time: at 12 spins each dense matrix is
    // 2^24 entries.
    let mut psi = vec![Complex64::ZERO; dim];
    psi[dim - 1] = Complex64::ONE;
    psi = hadamard_gate(1, n)?.mul_vec(&psi)?;
    for k in 2..=n {
        psi = environment_rotation(theta, k, n)?.mul_vec(&psi)?;
    }
    for k in 2..=n {
        psi = cnot(1, k, n)?.mul_vec(&psi)?;
    }
    let joint = DensityMatrix::from_pure(&psi)?;
    let reduced = joint.partial_trace(&[1])?;
    let coherence_bruteforce = reduced.mat()[(0, 1)] * 2.0;

    Ok(NEnvOutcome {
        coherence_closed: -theta.sin().powi(n_env as i32),
        coherence_bruteforce,
    })
}

/// Run the double-quantum preparation on the TCE carbons (proton decoupled,
/// then traced). Returns the trace-1 two-spin state; it is pure and commutes
/// with Iz(1)Iz(2).
pub fn scenario_bell_prep() -> DensityMatrix {
    let sys = SpinSystem::tce();
    let seq = parse(BELLPREP_SEQ).expect("bundled sequence parses");
    let props = compile(&seq, &sys, &Binding::new()).expect("bundled sequence compiles");
    let rho = environment_mixed(&pseudo_pure_down(2).expect("two spins"), 1)
        .expect("one environment spin");
    let out = apply_propagators(&props, &rho).expect("unitary pipeline");
    acquire_decoupled(&out, &sys, &["H"]).expect("trace proton")
}

/// The double-quantum experiment as a sequence for an arbitrary system:
/// prepare the first two spins (environment decoupled), then a refocused
/// evolution period of symbolic length `t` with every spin active.
pub fn dq_experiment_sequence(sys: &SpinSystem) -> Result<PulseSequence, ScenarioError> {
    if sys.spin_count() < 3 {
        return Err(ScenarioError::SystemTooSmall(3));
    }
    let env_labels: Vec<String> = sys.labels()[2..].to_vec();
    let l1 = sys.label(0).to_string();
    let l2 = sys.label(1).to_string();

    let mut elements = Vec::new();
    for e in &env_labels {
        elements.push(SequenceElement::Decouple {
            spin: e.clone(),
            on: true,
        });
    }
    elements.extend([
        SequenceElement::Pulse {
            angle: AngleExpr::Pi { num: 1, den: 2 },
            axis: Axis::X,
            targets: vec![l1.clone(), l2.clone()],
        },
        SequenceElement::Delay(DelaySpec::CouplingQuarter {
            a: l1.clone(),
            b: l2.clone(),
        }),
        SequenceElement::Pulse {
            angle: AngleExpr::Pi { num: 1, den: 1 },
            axis: Axis::X,
            targets: vec![l1.clone(), l2.clone()],
        },
        SequenceElement::Delay(DelaySpec::CouplingQuarter {
            a: l1.clone(),
            b: l2.clone(),
        }),
        SequenceElement::Pulse {
            angle: AngleExpr::Pi { num: 1, den: 2 },
            axis: Axis::Y,
            targets: vec![l2.clone()],
        },
    ]);
    for e in &env_labels {
        elements.push(SequenceElement::Decouple {
            spin: e.clone(),
            on: false,
        });
    }
    elements.push(SequenceElement::Refocus(DelaySpec::Sym("t".into())));
    Ok(PulseSequence::new(elements)?)
}

/// Double-quantum preparation and refocused evolution on an arbitrary
/// system: the first two spins form the system, the rest the (maximally
/// mixed) environment. Returns the trace-1 reduced two-spin state.
pub fn dq_state_for_system(
    sys: &SpinSystem,
    t: f64,
    apply_readout: bool,
) -> Result<DensityMatrix, ScenarioError> {
    if t < 0.0 {
        return Err(ScenarioError::NegativeTime(t));
    }
    let seq = dq_experiment_sequence(sys)?;
    let env_labels: Vec<String> = sys.labels()[2..].to_vec();

    let mut bind = Binding::new();
    bind.insert("t".into(), t);
    let props = compile(&seq, sys, &bind)?;

    let initial = environment_mixed(&pseudo_pure_down(2)?, env_labels.len())?;
    let evolved = apply_propagators(&props, &initial)?;
    let env_refs: Vec<&str> = env_labels.iter().map(|s| s.as_str()).collect();
    let mut system_state = acquire_decoupled(&evolved, sys, &env_refs)?;

    if apply_readout {
        // [pi/2]x on the second spin, in the language's rotation sense.
        let readout = rotation(-FRAC_PI_2, Axis::X, &[2], 2)?;
        system_state = system_state.conjugate(&readout)?;
    }
    Ok(system_state)
}

/// TCE double-quantum evolution: preparation, refocused evolution for `t`,
/// proton traced out, and optionally the [pi/2]x readout pulse on C2.
pub fn scenario_dq_evolution(t: f64, apply_readout: bool) -> Result<DensityMatrix, ScenarioError> {
    dq_state_for_system(&SpinSystem::tce(), t, apply_readout)
}

/// Double-quantum coherence of the evolved TCE state, normalized to +1 at
/// t = 0. Oscillates as cos(pi*(J13 + J23)*t).
pub fn dq_coherence(t: f64) -> Result<Complex64, ScenarioError> {
    let rho = scenario_dq_evolution(t, false)?;
    Ok(rho.mat()[(0, 3)] * -2.0)
}

/// One environment spin's couplings to the two system spins, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvCoupling {
    pub j1k_hz: f64,
    pub j2k_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEnvOutcome {
    /// Product law: prod_k cos(pi*(J1k + J2k)*t).
    pub closed: f64,
    /// Normalized double-quantum coherence from the full simulation.
    pub bruteforce: f64,
}

/// Double-quantum decay against `env_couplings.len()` mixed environment
/// spins, each coupled to both system spins. Closed form and full
/// simulation are returned side by side.
pub fn scenario_multi_env_dq(
    t: f64,
    env_couplings: &[EnvCoupling],
) -> Result<MultiEnvOutcome, ScenarioError> {
    let k = env_couplings.len();
    if k < 1 || k + 2 > MAX_SPINS - 1 {
        return Err(ScenarioError::EnvCountOutOfRange {
            got: k,
            max: MAX_SPINS - 3,
        });
    }
    let mut spins: Vec<(String, f64)> = vec![("C1".into(), 903.6), ("C2".into(), 0.0)];
    let mut couplings: Vec<(String, String, f64)> = vec![("C1".into(), "C2".into(), 103.1)];
    for (i, c) in env_couplings.iter().enumerate() {
        let label = format!("E{}", i + 1);
        spins.push((label.clone(), 0.0));
        couplings.push(("C1".into(), label.clone(), c.j1k_hz));
        couplings.push(("C2".into(), label.clone(), c.j2k_hz));
    }
    let spin_refs: Vec<(&str, f64)> = spins.iter().map(|(l, o)| (l.as_str(), *o)).collect();
    let coupling_refs: Vec<(&str, &str, f64)> = couplings
        .iter()
        .map(|(a, b, hz)| (a.as_str(), b.as_str(), *hz))
        .collect();
    let sys = SpinSystem::new("C2", &spin_refs, &coupling_refs)?;

    let rho = dq_state_for_system(&sys, t, false)?;
    let corner = rho.mat()[(0, 3)] * -2.0;

    let closed = env_couplings
        .iter()
        .map(|c| (PI * (c.j1k_hz + c.j2k_hz) * t).cos())
        .product();
    Ok(MultiEnvOutcome {
        closed,
        bruteforce: corner.re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::StateKind;
    use crate::matrix::DEFAULT_TOL;
    use crate::operators::{embed, spin_half};

    /// Independent construction of the entangled joint state from its
    /// closed-form entries: the pure state (a, b, -b, -a)/sqrt(2) with
    /// a = cos(theta/2), b = sin(theta/2).
    fn closed_form_entangled(theta: f64) -> ComplexMatrix {
        let a = (theta / 2.0).cos();
        let b = (theta / 2.0).sin();
        let psi = [a, b, -b, -a].map(|v| Complex64::new(v / f64::sqrt(2.0), 0.0));
        let mut m = ComplexMatrix::zeros(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    #[test]
    fn gate_network_matches_closed_form_joint_state() {
        for theta in [0.0, 0.31, 50.3_f64.to_radians(), FRAC_PI_2, 2.2, PI] {
            let got = entangled_pair_state(theta);
            assert!(got.mat().approx_eq_default(&closed_form_entangled(theta)));
        }
    }

    #[test]
    fn cnot_on_product_state_reproduces_entangled_matrix() {
        let theta = 1.1;
        let product = product_pair_state(theta);
        let entangled = product
            .conjugate(&cnot(1, 2, 2).unwrap())
            .unwrap();
        assert!(entangled
            .mat()
            .approx_eq_default(&closed_form_entangled(theta)));
    }

    #[test]
    fn reduced_coherence_is_minus_sin_theta() {
        for theta in [0.0, 0.7, FRAC_PI_2, 2.9, 4.5] {
            let out = scenario_one_qubit(theta);
            assert!((out.coherence.re + theta.sin()).abs() < DEFAULT_TOL);
            assert!(out.coherence.im.abs() < DEFAULT_TOL);
            // Unit diagonal at every theta.
            assert!((out.rho_reduced.mat()[(0, 0)].re - 1.0).abs() < DEFAULT_TOL);
            assert!((out.rho_reduced.mat()[(1, 1)].re - 1.0).abs() < DEFAULT_TOL);
            assert_eq!(out.rho_reduced.kind(), StateKind::Deviation);
        }
    }

    #[test]
    fn theta_zero_gives_completely_mixed_reduced_state() {
        let out = scenario_one_qubit(0.0);
        let id = ComplexMatrix::identity(2).unwrap();
        assert!(out.rho_reduced.mat().approx_eq_default(&id));
    }

    #[test]
    fn theta_50_3_degrees_matches_brute_force_magnitude() {
        // Oracle: the closed-form joint state, traced by hand.
        let theta = 50.3_f64.to_radians();
        let out = scenario_one_qubit(theta);
        let oracle = DensityMatrix::true_state(closed_form_entangled(theta))
            .unwrap()
            .partial_trace(&[1])
            .unwrap();
        let expected = oracle.mat()[(0, 1)] * 2.0;
        assert!((out.coherence - expected).norm() < DEFAULT_TOL);
        assert!((out.coherence.norm() - 0.7694).abs() < 1e-4);
    }

    #[test]
    fn single_environment_reduces_to_one_qubit_scenario() {
        for theta in [0.3, 1.2, 2.8] {
            let one = scenario_one_qubit(theta);
            let multi = scenario_n_environment(theta, 1).unwrap();
            assert!((one.coherence - multi.coherence_bruteforce).norm() < 1e-12);
            assert!((multi.coherence_closed - one.coherence.re).abs() < 1e-12);
        }
    }

    #[test]
    fn no_decoherence_at_maximal_coherence_angle() {
        for n_env in [1, 3, 5] {
            let out = scenario_n_environment(FRAC_PI_2, n_env).unwrap();
            assert!((out.coherence_bruteforce.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn three_environment_spins_at_quarter_pi() {
        let out = scenario_n_environment(std::f64::consts::FRAC_PI_4, 3).unwrap();
        let expected = 0.3535533905932738; // (sqrt(2)/2)^3
        assert!((out.coherence_bruteforce.norm() - expected).abs() < 1e-10);
        assert!((out.coherence_closed + expected).abs() < 1e-10);
    }

    #[test]
    fn env_count_is_range_checked() {
        assert!(matches!(
            scenario_n_environment(1.0, 0),
            Err(ScenarioError::EnvCountOutOfRange { .. })
        ));
        assert!(matches!(
            scenario_n_environment(1.0, 12),
            Err(ScenarioError::EnvCountOutOfRange { .. })
        ));
        assert!(scenario_n_environment(1.0, 11).is_ok());
    }

    #[test]
    fn bell_prep_is_pure_and_commutes_with_zz() {
        let rho = scenario_bell_prep();
        assert!((rho.purity() - 1.0).abs() < DEFAULT_TOL);
        let ops = spin_half();
        let zz = embed(&ops.iz, 1, 2)
            .unwrap()
            .mul(&embed(&ops.iz, 2, 2).unwrap())
            .unwrap();
        let comm = rho
            .mat()
            .mul(&zz)
            .unwrap()
            .sub(&zz.mul(rho.mat()).unwrap())
            .unwrap();
        assert!(comm.max_abs() < DEFAULT_TOL);
    }

    #[test]
    fn dq_coherence_normalizes_to_one_at_zero_time() {
        let c = dq_coherence(0.0).unwrap();
        assert!((c.re - 1.0).abs() < DEFAULT_TOL);
        assert!(c.im.abs() < DEFAULT_TOL);
    }

    #[test]
    fn dq_coherence_at_3_5_ms_matches_formula() {
        // cos(pi * (201.3 + 9.23) Hz * 3.5 ms), cross-checked by the full
        // three-spin simulation inside dq_coherence.
        let t = 0.0035;
        let expected = (PI * (201.3 + 9.23) * t).cos();
        assert!((expected + 0.678).abs() < 1e-3);
        let c = dq_coherence(t).unwrap();
        assert!((c.re - expected).abs() < 1e-10);
    }

    #[test]
    fn single_env_multi_scenario_matches_dq_evolution() {
        let t = 0.004;
        let out = scenario_multi_env_dq(
            t,
            &[EnvCoupling {
                j1k_hz: 9.23,
                j2k_hz: 201.3,
            }],
        )
        .unwrap();
        let direct = dq_coherence(t).unwrap();
        assert!((out.bruteforce - direct.re).abs() < 1e-10);
        assert!((out.closed - out.bruteforce).abs() < 1e-10);
    }

    #[test]
    fn multi_env_product_law_at_zero_time_is_one() {
        let envs = [
            EnvCoupling { j1k_hz: 30.0, j2k_hz: 70.0 },
            EnvCoupling { j1k_hz: 50.0, j2k_hz: 100.0 },
        ];
        let out = scenario_multi_env_dq(0.0, &envs).unwrap();
        assert!((out.closed - 1.0).abs() < 1e-12);
        assert!((out.bruteforce - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vanishing_factor_kills_the_product() {
        // Couplings summing to {100, 150, 250} Hz at t = 2 ms: the third
        // factor is cos(pi/2) = 0.
        let envs = [
            EnvCoupling { j1k_hz: 30.0, j2k_hz: 70.0 },
            EnvCoupling { j1k_hz: 50.0, j2k_hz: 100.0 },
            EnvCoupling { j1k_hz: 100.0, j2k_hz: 150.0 },
        ];
        let out = scenario_multi_env_dq(0.002, &envs).unwrap();
        assert!(out.closed.abs() < 1e-9);
        assert!(out.bruteforce.abs() < 1e-9);
        assert!((out.closed - out.bruteforce).abs() < 1e-9);
    }
}
