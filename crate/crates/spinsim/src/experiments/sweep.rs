//! Parameter sweeps over the scenario runners, with deterministic seeded
//! noise injection for fit-robustness studies.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::nmr::peak_amplitudes;
use crate::seq::Binding;
use crate::system::SpinSystem;

use super::scenarios::{
    dq_experiment_sequence, dq_state_for_system, product_pair_state, scenario_n_environment,
    scenario_one_qubit, ScenarioError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("grid step must be positive, got {0}")]
    BadStep(f64),
    #[error("grid start {start} must lie below stop {stop}")]
    BadRange { start: f64, stop: f64 },
    #[error("sweep produced no samples")]
    Empty,
    #[error("sample parameters must increase strictly")]
    NotIncreasing,
    #[error("scenario needs binding {0:?}")]
    MissingBinding(String),
    #[error("binding {name}={value} is not a valid count")]
    BadCount { name: String, value: f64 },
    #[error("noise fraction {0} is negative")]
    NegativeSigma(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Nmr(#[from] crate::nmr::NmrError),
}

/// Inclusive sampling grid: start, start+step, ..., up to stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, SweepError> {
        if self.step <= 0.0 {
            return Err(SweepError::BadStep(self.step));
        }
        if self.start >= self.stop {
            return Err(SweepError::BadRange {
                start: self.start,
                stop: self.stop,
            });
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub param: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepMetadata {
    /// Provenance of the spin system (path or builtin name).
    pub system: String,
    /// Sequence text, when the scenario ran one.
    pub sequence: Option<String>,
    pub bindings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: String,
    pub param_name: String,
    pub samples: Vec<SweepSample>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn new(
        scenario: String,
        param_name: String,
        samples: Vec<SweepSample>,
        metadata: SweepMetadata,
    ) -> Result<Self, SweepError> {
        if samples.is_empty() {
            return Err(SweepError::Empty);
        }
        if samples.windows(2).any(|w| w[0].param >= w[1].param) {
            return Err(SweepError::NotIncreasing);
        }
        Ok(Self {
            scenario,
            param_name,
            samples,
            metadata,
        })
    }
}

/// Scenario identifiers accepted by [`sweep`].
pub const SCENARIOS: &[&str] = &["one-qubit", "n-env", "product", "dq"];

/// Evaluate one scenario over a grid.
///
/// - `one-qubit`: reduced coherence versus theta (radians); equals -sin(theta).
/// - `n-env`: brute-force reduced coherence versus theta, with the
///   environment size from binding `n`; equals -sin^n(theta).
/// - `product`: sum of the two doublet amplitudes of the first spin versus
///   theta; constant in theta.
/// - `dq`: double-quantum coherence versus time (seconds), normalized to +1
///   at t = 0, for the given system (first two spins observed, rest mixed).
pub fn sweep(
    scenario: &str,
    sys: &SpinSystem,
    system_label: &str,
    grid: &GridSpec,
    fixed: &Binding,
) -> Result<SweepResult, SweepError> {
    let points = grid.points()?;
    let mut metadata = SweepMetadata {
        system: system_label.to_string(),
        sequence: None,
        bindings: fixed.clone(),
    };
    let (param_name, values): (&str, Vec<Complex64>) = match scenario {
        "one-qubit" => (
            "theta",
            points
                .iter()
                .map(|&theta| scenario_one_qubit(theta).coherence)
                .collect(),
        ),
        "n-env" => {
            let n = *fixed
                .get("n")
                .ok_or_else(|| SweepError::MissingBinding("n".into()))?;
            if n < 1.0 || n.fract() != 0.0 {
                return Err(SweepError::BadCount {
                    name: "n".into(),
                    value: n,
                });
            }
            let mut values = Vec::with_capacity(points.len());
            for &theta in &points {
                values.push(scenario_n_environment(theta, n as usize)?.coherence_bruteforce);
            }
            ("theta", values)
        }
        "product" => {
            if sys.spin_count() < 2 {
                return Err(ScenarioError::SystemTooSmall(2).into());
            }
            let observed = sys.label(0).to_string();
            let partner = sys.label(1).to_string();
            let mut values = Vec::with_capacity(points.len());
            for &theta in &points {
                let rho = product_pair_state(theta);
                let peaks = peak_amplitudes(&rho, sys, &observed, &partner)?;
                values.push(peaks.sum());
            }
            ("theta", values)
        }
        "dq" => {
            metadata.sequence = Some(dq_experiment_sequence(sys)?.format());
            let mut values = Vec::with_capacity(points.len());
            for &t in &points {
                let rho = dq_state_for_system(sys, t, false)?;
                values.push(rho.mat()[(0, 3)] * -2.0);
            }
            ("t", values)
        }
        other => return Err(SweepError::UnknownScenario(other.to_string())),
    };
    let samples = points
        .into_iter()
        .zip(values)
        .map(|(param, value)| SweepSample { param, value })
        .collect();
    SweepResult::new(scenario.to_string(), param_name.to_string(), samples, metadata)
}

/// Add zero-mean Gaussian noise of scale `sigma * max|value|` to every
/// sample, independently on the real and imaginary parts.
///
/// Each point draws from its own stream keyed on (seed, index), so the
/// result does not depend on evaluation order.
pub fn inject_noise(data: &SweepResult, sigma: f64, seed: u64) -> Result<SweepResult, SweepError> {
    if sigma < 0.0 {
        return Err(SweepError::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(data.clone());
    }
    let scale = sigma
        * data
            .samples
            .iter()
            .map(|s| s.value.norm())
            .fold(0.0, f64::max);
    let samples = data
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let dre: f64 = StandardNormal.sample(&mut rng);
            let dim: f64 = StandardNormal.sample(&mut rng);
            SweepSample {
                param: s.param,
                value: s.value + Complex64::new(dre * scale, dim * scale),
            }
        })
        .collect();
    Ok(SweepResult {
        scenario: data.scenario.clone(),
        param_name: data.param_name.clone(),
        samples,
        metadata: data.metadata.clone(),
    })
}
