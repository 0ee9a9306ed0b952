//! Least-squares sinusoid fitting for sweep data.
//!
//! Model: y = A*cos(2*pi*x/T + phi) + c. A coarse period grid search
//! (candidates from 0.5x to 4x the data span in 1% steps, with A, phi, c
//! solved linearly at each candidate) seeds a damped Gauss-Newton
//! refinement over all four parameters.

use thiserror::Error;

use super::sweep::SweepResult;

const MIN_SAMPLES: usize = 6;
const MAX_ITERATIONS: usize = 200;
const RELATIVE_CONVERGENCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("data is constant; no period can be fitted")]
    DegenerateData,
}

/// Which part of the complex samples to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitComponent {
    Re,
    Im,
    Abs,
}

impl FitComponent {
    pub fn extract(&self, v: num_complex::Complex64) -> f64 {
        match self {
            FitComponent::Re => v.re,
            FitComponent::Im => v.im,
            FitComponent::Abs => v.norm(),
        }
    }
}

impl std::str::FromStr for FitComponent {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "re" => Ok(FitComponent::Re),
            "im" => Ok(FitComponent::Im),
            "abs" => Ok(FitComponent::Abs),
            other => Err(format!("unknown component {other:?} (expected re, im or abs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// Non-negative amplitude A.
    pub amplitude: f64,
    /// Period T in the parameter's units.
    pub period: f64,
    /// Phase in radians, wrapped to (-pi, pi].
    pub phase: f64,
    /// Constant offset c.
    pub offset: f64,
    pub rms_residual: f64,
}

pub fn fit_sinusoid(data: &SweepResult, component: FitComponent) -> Result<SinusoidFit, FitError> {
    let xs: Vec<f64> = data.samples.iter().map(|s| s.param).collect();
    let ys: Vec<f64> = data
        .samples
        .iter()
        .map(|s| component.extract(s.value))
        .collect();
    fit_samples(&xs, &ys)
}

fn fit_samples(xs: &[f64], ys: &[f64]) -> Result<SinusoidFit, FitError> {
    let n = xs.len();
    if n < MIN_SAMPLES {
        return Err(FitError::TooFewSamples(n));
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let spread = ys
        .iter()
        .map(|y| (y - mean).abs())
        .fold(0.0, f64::max);
    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max).max(1.0);
    if spread <= 1e-12 * scale {
        return Err(FitError::DegenerateData);
    }

    let span = xs[n - 1] - xs[0];

    // Coarse search: geometric period grid at 1% resolution.
    let mut best: Option<([f64; 4], f64)> = None;
    let mut period = 0.5 * span;
    while period <= 4.0 * span * 1.005 {
        if let Some((params, sse)) = linear_fit_at_period(xs, ys, period) {
            if best.is_none_or(|(_, best_sse)| sse < best_sse) {
                best = Some((params, sse));
            }
        }
        period *= 1.01;
    }
    let (mut params, mut sse) = best.expect("grid is nonempty");

    // Damped Gauss-Newton on (A, T, phi, c).
    for _ in 0..MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(xs, ys, &params);
        let Some(delta) = solve4(jtj, jtr) else {
            break;
        };
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let trial = [
                params[0] - step * delta[0],
                params[1] - step * delta[1],
                params[2] - step * delta[2],
                params[3] - step * delta[3],
            ];
            if trial[1] > 0.0 {
                let trial_sse = sum_squared_residuals(xs, ys, &trial);
                if trial_sse < sse {
                    let converged = params
                        .iter()
                        .zip(&trial)
                        .all(|(p, t)| (p - t).abs() <= RELATIVE_CONVERGENCE * (p.abs() + 1e-12));
                    params = trial;
                    sse = trial_sse;
                    improved = true;
                    if converged {
                        return Ok(finish(params, sse, xs.len()));
                    }
                    break;
                }
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    Ok(finish(params, sse, xs.len()))
}

fn finish(mut params: [f64; 4], sse: f64, n: usize) -> SinusoidFit {
    if params[0] < 0.0 {
        params[0] = -params[0];
        params[2] += std::f64::consts::PI;
    }
    // Wrap the phase to (-pi, pi].
    let tau = std::f64::consts::TAU;
    let mut phase = params[2] % tau;
    if phase > std::f64::consts::PI {
        phase -= tau;
    } else if phase <= -std::f64::consts::PI {
        phase += tau;
    }
    SinusoidFit {
        amplitude: params[0],
        period: params[1],
        phase,
        offset: params[3],
        rms_residual: (sse / n as f64).sqrt(),
    }
}

/// Solve y ~ alpha*cos(w x) + beta*sin(w x) + c for fixed period, returning
/// (A, T, phi, c) and the sum of squared residuals.
fn linear_fit_at_period(xs: &[f64], ys: &[f64], period: f64) -> Option<([f64; 4], f64)> {
    let w = std::f64::consts::TAU / period;
    let n = xs.len() as f64;
    let (mut sc, mut ss, mut scc, mut sss, mut scs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut syc, mut sys_) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (s, c) = (w * x).sin_cos();
        sc += c;
        ss += s;
        scc += c * c;
        sss += s * s;
        scs += c * s;
        sy += y;
        syc += y * c;
        sys_ += y * s;
    }
    // Normal equations for [alpha, beta, c].
    let m = [
        [scc, scs, sc],
        [scs, sss, ss],
        [sc, ss, n],
    ];
    let rhs = [syc, sys_, sy];
    let sol = solve3(m, rhs)?;
    let (alpha, beta, c) = (sol[0], sol[1], sol[2]);
    let amplitude = alpha.hypot(beta);
    let phase = (-beta).atan2(alpha);
    let params = [amplitude, period, phase, c];
    Some((params, sum_squared_residuals(xs, ys, &params)))
}

fn model(x: f64, p: &[f64; 4]) -> f64 {
    p[0] * (std::f64::consts::TAU * x / p[1] + p[2]).cos() + p[3]
}

fn sum_squared_residuals(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (model(x, p) - y).powi(2))
        .sum()
}

/// J^T J and J^T r for the residual r_i = model(x_i) - y_i.
fn normal_equations(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> ([[f64; 4]; 4], [f64; 4]) {
    let tau = std::f64::consts::TAU;
    let mut jtj = [[0.0; 4]; 4];
    let mut jtr = [0.0; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = tau * x / p[1] + p[2];
        let (su, cu) = u.sin_cos();
        let r = p[0] * cu + p[3] - y;
        let j = [
            cu,
            p[0] * su * tau * x / (p[1] * p[1]),
            -p[0] * su,
            1.0,
        ];
        for a in 0..4 {
            jtr[a] += j[a] * r;
            for b in 0..4 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    gauss_solve(m, rhs)
}

fn solve4(m: [[f64; 4]; 4], rhs: [f64; 4]) -> Option<[f64; 4]> {
    gauss_solve(m, rhs)
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn gauss_solve<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&a, &b| {
            m[a][col]
                .abs()
                .partial_cmp(&m[b][col].abs())
                .expect("finite")
        })?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut out = [0.0; N];
    for col in (0..N).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..N {
            acc -= m[col][k] * out[k];
        }
        out[col] = acc / m[col][col];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::{SweepMetadata, SweepResult, SweepSample};
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    fn sweep_of(xs: &[f64], ys: &[f64]) -> SweepResult {
        let samples = xs
            .iter()
            .zip(ys)
            .map(|(&param, &y)| SweepSample {
                param,
                value: Complex64::new(y, 0.0),
            })
            .collect();
        SweepResult::new(
            "test".into(),
            "x".into(),
            samples,
            SweepMetadata::default(),
        )
        .unwrap()
    }

    #[test]
    fn recovers_clean_sine_parameters() {
        let xs: Vec<f64> = (0..37).map(|i| i as f64 * 10.0_f64.to_radians()).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| -x.sin()).collect();
        let fit = fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re).unwrap();
        assert!((fit.period - TAU).abs() / TAU < 0.005, "period {}", fit.period);
        assert!((fit.amplitude - 1.0).abs() < 0.005, "amplitude {}", fit.amplitude);
        assert!(fit.offset.abs() < 1e-6);
        assert!(fit.rms_residual < 1e-8);
    }

    #[test]
    fn recovers_period_below_the_grid_floor() {
        // True period is 0.475 of the span; the coarse grid starts at 0.5,
        // so Gauss-Newton has to walk down to it.
        let period = 0.0095;
        let xs: Vec<f64> = (0..41).map(|i| i as f64 * 0.0005).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (TAU * x / period).cos()).collect();
        let fit = fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re).unwrap();
        assert!(
            (fit.period - period).abs() / period < 0.005,
            "period {}",
            fit.period
        );
    }

    #[test]
    fn fits_amplitude_offset_and_phase() {
        let xs: Vec<f64> = (0..48).map(|i| i as f64 * 0.13).collect();
        let truth = [2.5, 3.1, 0.8, -0.4];
        let ys: Vec<f64> = xs.iter().map(|&x| model(x, &truth)).collect();
        let fit = fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re).unwrap();
        assert!((fit.amplitude - truth[0]).abs() < 1e-4);
        assert!((fit.period - truth[1]).abs() < 1e-4);
        assert!((fit.phase - truth[2]).abs() < 1e-4);
        assert!((fit.offset - truth[3]).abs() < 1e-4);
    }

    #[test]
    fn scale_equivariance() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.2).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 1.3 * (TAU * x / 3.7 + 0.4).cos() + 0.2).collect();
        let k = 4.25;
        let scaled: Vec<f64> = ys.iter().map(|&y| k * y).collect();
        let f1 = fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re).unwrap();
        let f2 = fit_sinusoid(&sweep_of(&xs, &scaled), FitComponent::Re).unwrap();
        assert!((f2.amplitude - k * f1.amplitude).abs() < 1e-6 * k);
        assert!((f2.offset - k * f1.offset).abs() < 1e-6 * k);
        assert!((f2.period - f1.period).abs() < 1e-8 * f1.period.abs().max(1.0));
        assert!((f2.phase - f1.phase).abs() < 1e-8);
    }

    #[test]
    fn noisy_sine_period_stays_within_three_percent() {
        use crate::experiments::sweep::inject_noise;
        let xs: Vec<f64> = (0..37).map(|i| i as f64 * 10.0_f64.to_radians()).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| -x.sin()).collect();
        let clean = sweep_of(&xs, &ys);
        for seed in 0..10 {
            let noisy = inject_noise(&clean, 0.02, seed).unwrap();
            let fit = fit_sinusoid(&noisy, FitComponent::Re).unwrap();
            assert!(
                (fit.period - TAU).abs() / TAU < 0.03,
                "seed {seed}: period {}",
                fit.period
            );
        }
    }

    #[test]
    fn rejects_too_few_samples() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.0, 1.0, 0.0, -1.0, 0.0];
        assert!(matches!(
            fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re),
            Err(FitError::TooFewSamples(5))
        ));
    }

    #[test]
    fn rejects_constant_data() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let ys = vec![0.7; 12];
        assert!(matches!(
            fit_sinusoid(&sweep_of(&xs, &ys), FitComponent::Re),
            Err(FitError::DegenerateData)
        ));
    }

    #[test]
    fn abs_component_fits_magnitudes() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        let samples: Vec<SweepSample> = xs
            .iter()
            .map(|&x| SweepSample {
                param: x,
                value: Complex64::new(0.0, (TAU * x / 4.4).cos() + 2.0),
            })
            .collect();
        let data = SweepResult::new(
            "test".into(),
            "x".into(),
            samples,
            SweepMetadata::default(),
        )
        .unwrap();
        let fit = fit_sinusoid(&data, FitComponent::Abs).unwrap();
        assert!((fit.period - 4.4).abs() < 0.01);
    }
}
