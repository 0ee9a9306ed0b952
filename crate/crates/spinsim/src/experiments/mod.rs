//! Scenario runners, parameter sweeps, noise injection, and sinusoid fits.

pub mod fit;
pub mod scenarios;
pub mod sweep;

pub use fit::{fit_sinusoid, FitComponent, FitError, SinusoidFit};
pub use scenarios::{
    dq_coherence, dq_experiment_sequence, dq_state_for_system, entangled_pair_state,
    environment_rotation, hadamard_gate, product_pair_state, scenario_bell_prep,
    scenario_dq_evolution, scenario_multi_env_dq, scenario_n_environment, scenario_one_qubit,
    EnvCoupling, MultiEnvOutcome, NEnvOutcome, OneQubitOutcome, ScenarioError, BELLPREP_SEQ,
    ENTANGLE_SEQ, MAX_SPINS, PRODUCT_SEQ,
};
pub use sweep::{
    inject_noise, sweep, GridSpec, SweepError, SweepMetadata, SweepResult, SweepSample, SCENARIOS,
};
