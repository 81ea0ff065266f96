//! Least-squares fit of a falling erf edge
//! y(t) = B + (A/2) * (1 - erf((t - t0) / (sigma * sqrt(2))))
//! by damped Gauss-Newton with an analytic Jacobian.

use thiserror::Error;

use crate::model::EdgeLabel;

/// 90%-to-10% fall time of a normal-CDF edge, in units of sigma
/// (2 * Phi^-1(0.9)).
pub const FALL_TIME_FACTOR: f64 = 2.5631;

const PARAM_TOLERANCE: f64 = 1e-6;
const MAX_ITERATIONS: usize = 200;
/// Detected amplitude must clear this multiple of the residual noise.
const MIN_AMPLITUDE_OVER_NOISE: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("edge fit needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("no falling edge: amplitude does not clear the residual noise")]
    NoEdge,
    #[error("fit did not converge")]
    NonConvergence,
}

/// Fitted falling-edge parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFit {
    pub amplitude: f64,
    pub baseline: f64,
    /// Edge midpoint (the arrival time), ps.
    pub t0_ps: f64,
    pub sigma_ps: f64,
    /// 90-10 fall time, FALL_TIME_FACTOR * sigma.
    pub fall_time_90_10_ps: f64,
    pub rms_residual: f64,
    pub label: EdgeLabel,
}

pub const MIN_FIT_SAMPLES: usize = 8;

fn erf_edge(t: f64, a: f64, b: f64, t0: f64, sigma: f64) -> f64 {
    let z = (t - t0) / (sigma * std::f64::consts::SQRT_2);
    b + 0.5 * a * (1.0 - libm::erf(z))
}

/// 5-point centered moving average; the window shrinks at the boundaries.
pub fn smooth5(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

fn solve_4x4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = rhs[row];
        for k in row + 1..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

fn cost(samples: &[(f64, f64)], p: &[f64; 4]) -> f64 {
    samples
        .iter()
        .map(|&(t, y)| {
            let r = y - erf_edge(t, p[0], p[1], p[2], p[3]);
            r * r
        })
        .sum()
}

/// Initial guess: baseline and amplitude from the value range, t0 at the
/// steepest negative finite difference of the 5-point smoothed profile,
/// sigma at 10 sample steps.
fn initial_guess(samples: &[(f64, f64)]) -> [f64; 4] {
    let ys: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();
    let smoothed = smooth5(&ys);
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut steepest = 0.0;
    let mut t0 = samples[samples.len() / 2].0;
    for i in 0..samples.len() - 1 {
        let dt = samples[i + 1].0 - samples[i].0;
        if dt <= 0.0 {
            continue;
        }
        let slope = (smoothed[i + 1] - smoothed[i]) / dt;
        if slope < steepest {
            steepest = slope;
            t0 = 0.5 * (samples[i].0 + samples[i + 1].0);
        }
    }

    let mean_step = (samples[samples.len() - 1].0 - samples[0].0) / (samples.len() - 1) as f64;
    [y_max - y_min, y_min, t0, 10.0 * mean_step.abs().max(1.0)]
}

/// Fit a falling erf edge to (time ps, value) samples.
///
/// Pre: at least [`MIN_FIT_SAMPLES`] samples. A fit whose amplitude does not
/// clear 3x the residual noise, or that fails to converge, is reported as
/// [`FitError::NoEdge`] / [`FitError::NonConvergence`].
///
/// The descent restarts from a few deterministic width guesses; unevenly
/// spaced samples (adaptive probes) otherwise strand the optimizer in
/// narrow-sigma local minima.
pub fn fit_erf_edge(samples: &[(f64, f64)]) -> Result<EdgeFit, FitError> {
    fit_erf_edge_impl(samples, None)
}

/// Fit with the edge width pinned to a calibrated value. Sparse probe sets
/// (a handful of adaptive-scan points) do not constrain all four parameters;
/// the gate width is a system constant and can be supplied.
pub fn fit_erf_edge_fixed_width(samples: &[(f64, f64)], sigma_ps: f64) -> Result<EdgeFit, FitError> {
    fit_erf_edge_impl(samples, Some(sigma_ps))
}

fn fit_erf_edge_impl(samples: &[(f64, f64)], fixed_sigma: Option<f64>) -> Result<EdgeFit, FitError> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples { got: samples.len(), min: MIN_FIT_SAMPLES });
    }
    let mut samples = samples.to_vec();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let base = initial_guess(&samples);
    let span = samples[samples.len() - 1].0 - samples[0].0;
    let sigma_starts = match fixed_sigma {
        Some(s) => vec![s],
        None => vec![base[3], span / 100.0, span / 20.0],
    };
    let mut best: Option<([f64; 4], f64)> = None;
    for sigma0 in sigma_starts {
        if !(sigma0 > 0.0) {
            continue;
        }
        let start = [base[0], base[1], base[2], sigma0];
        if let Some((p, cost)) = lm_minimize(&samples, start, fixed_sigma.is_some()) {
            if best.as_ref().map_or(true, |&(_, c)| cost < c) {
                best = Some((p, cost));
            }
        }
    }
    let Some((p, current_cost)) = best else {
        return Err(FitError::NonConvergence);
    };

    let rms = (current_cost / samples.len() as f64).sqrt();
    let amplitude = p[0];
    if amplitude <= 0.0 || amplitude <= MIN_AMPLITUDE_OVER_NOISE * rms {
        return Err(FitError::NoEdge);
    }
    // A midpoint outside the sampled span (or a width beyond it) means the
    // window saw only a plateau or a ramp; the erf model is unconstrained
    // there and the "edge" is an extrapolation artifact.
    let t_first = samples[0].0;
    let t_last = samples[samples.len() - 1].0;
    if p[2] < t_first || p[2] > t_last || p[3] > (t_last - t_first) {
        return Err(FitError::NoEdge);
    }

    Ok(EdgeFit {
        amplitude,
        baseline: p[1],
        t0_ps: p[2],
        sigma_ps: p[3],
        fall_time_90_10_ps: FALL_TIME_FACTOR * p[3],
        rms_residual: rms,
        label: EdgeLabel::Unlabeled,
    })
}

/// Damped Gauss-Newton descent; returns the refined parameters and final
/// cost, or None when no step ever converged.
fn lm_minimize(
    samples: &[(f64, f64)],
    start: [f64; 4],
    sigma_fixed: bool,
) -> Option<([f64; 4], f64)> {
    let mut p = start;
    let mut lambda = 1e-3;
    let mut current_cost = cost(samples, &p);
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        // Normal equations J^T J and J^T r with the analytic Jacobian.
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        for &(t, y) in samples {
            let sigma = p[3];
            let z = (t - p[2]) / (sigma * std::f64::consts::SQRT_2);
            let gauss = (-z * z).exp();
            let d_a = 0.5 * (1.0 - libm::erf(z));
            let d_b = 1.0;
            let d_t0 = p[0] * gauss / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
            let d_sigma = if sigma_fixed { 0.0 } else { d_t0 * (t - p[2]) / sigma };
            let jac = [d_a, d_b, d_t0, d_sigma];
            let r = y - erf_edge(t, p[0], p[1], p[2], p[3]);
            for i in 0..4 {
                jtr[i] += jac[i] * r;
                for j in 0..4 {
                    jtj[i][j] += jac[i] * jac[j];
                }
            }
        }
        if sigma_fixed {
            // Keep the system nonsingular with the sigma column zeroed.
            jtj[3][3] = 1.0;
            jtr[3] = 0.0;
        }

        let mut accepted = false;
        for _ in 0..24 {
            let mut damped = jtj;
            for i in 0..4 {
                damped[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve_4x4(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = [
                p[0] + delta[0],
                p[1] + delta[1],
                p[2] + delta[2],
                p[3] + delta[3],
            ];
            trial[3] = trial[3].abs().max(1e-9);
            let trial_cost = cost(samples, &trial);
            if trial_cost <= current_cost {
                let rel_change = (0..4)
                    .map(|i| (trial[i] - p[i]).abs() / p[i].abs().max(1e-12))
                    .fold(0.0f64, f64::max);
                p = trial;
                current_cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if rel_change < PARAM_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // Damping saturated: the current point is a (local) minimum.
            converged = true;
            break;
        }
    }

    converged.then_some((p, current_cost))
}
