//! Falling-edge detection on scan profiles and dual-profile classification.

use crate::model::EdgeLabel;

use super::fit::{fit_erf_edge, smooth5, EdgeFit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    /// Half-width of the fit window around a candidate, in gate steps.
    pub fit_window_steps: usize,
    /// Candidates closer than this are merged, keeping the better residual.
    pub merge_radius_steps: usize,
    /// Detection threshold in robust noise units of the differenced profile.
    pub noise_multiplier: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self { fit_window_steps: 60, merge_radius_steps: 20, noise_multiplier: 3.0 }
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 0 {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    } else {
        values[n / 2]
    }
}

/// Robust noise scale of a series: 1.4826 * median absolute deviation.
fn robust_noise(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let med = median(&mut v);
    let mut deviations: Vec<f64> = values.iter().map(|&x| (x - med).abs()).collect();
    1.4826 * median(&mut deviations)
}

/// Locate falling edges: candidates seeded at local minima of the smoothed
/// finite difference below -noise_multiplier times the robust noise scale,
/// each refined by an erf fit over a +/- fit_window, then merged within the
/// merge radius keeping the lower residual. Sorted by t0.
pub fn detect_falling_edges(
    gate_times_ps: &[i64],
    values: &[f64],
    params: &DetectParams,
) -> Vec<EdgeFit> {
    let n = values.len();
    if n < 3 || gate_times_ps.len() != n {
        return Vec::new();
    }
    let smoothed = smooth5(values);
    let diffs: Vec<f64> = (0..n - 1).map(|i| smoothed[i + 1] - smoothed[i]).collect();

    let value_range = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = robust_noise(&diffs).max(1e-12 * value_range.max(1e-300));
    let threshold = -params.noise_multiplier * scale;

    let mut candidates = Vec::new();
    for i in 0..diffs.len() {
        if diffs[i] >= threshold {
            continue;
        }
        let left_ok = i == 0 || diffs[i] <= diffs[i - 1];
        let right_ok = i + 1 == diffs.len() || diffs[i] <= diffs[i + 1];
        if left_ok && right_ok {
            candidates.push(i);
        }
    }
    // Runs of equal differences seed one candidate each.
    candidates.dedup_by(|&mut b, &mut a| b == a + 1 && diffs[a] == diffs[b]);

    let step = if n > 1 {
        ((gate_times_ps[n - 1] - gate_times_ps[0]) / (n as i64 - 1)).max(1)
    } else {
        1
    };

    let mut fits: Vec<EdgeFit> = Vec::new();
    for k in candidates {
        let lo = k.saturating_sub(params.fit_window_steps);
        let hi = (k + params.fit_window_steps).min(n - 1);
        let samples: Vec<(f64, f64)> =
            (lo..=hi).map(|i| (gate_times_ps[i] as f64, values[i])).collect();
        if let Ok(fit) = fit_erf_edge(&samples) {
            fits.push(fit);
        }
    }

    fits.sort_by(|a, b| a.t0_ps.total_cmp(&b.t0_ps));
    let merge_radius = (params.merge_radius_steps as i64 * step) as f64;
    let mut merged: Vec<EdgeFit> = Vec::new();
    for fit in fits {
        match merged.last_mut() {
            Some(last) if (fit.t0_ps - last.t0_ps).abs() <= merge_radius => {
                if fit.rms_residual < last.rms_residual {
                    *last = fit;
                }
            }
            _ => merged.push(fit),
        }
    }
    merged
}

/// One classified scene return.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEdge {
    pub fit: EdgeFit,
    /// True when the quantum/classical attribution could not be made
    /// unambiguously (several intensity edges compete for one correlation
    /// edge).
    pub ambiguous: bool,
    /// t0 of the intensity edge absorbed into a quantum label, if any.
    pub intensity_partner_ps: Option<f64>,
}

/// Dual-profile classification.
///
/// Each correlation edge is a quantum return and reports the
/// correlation-profile arrival time; the nearest intensity edge within the
/// tolerance is absorbed as its intensity-image partner. Intensity edges left
/// over are classical. When several intensity edges compete for one
/// correlation edge the attribution is flagged ambiguous on every edge
/// involved.
pub fn classify_edges(
    intensity_edges: &[EdgeFit],
    correlation_edges: &[EdgeFit],
    tolerance_ps: f64,
) -> Vec<LabeledEdge> {
    let mut consumed = vec![false; intensity_edges.len()];
    let mut ambiguous_intensity = vec![false; intensity_edges.len()];
    let mut labeled = Vec::new();

    for corr in correlation_edges {
        let mut in_tolerance: Vec<usize> = (0..intensity_edges.len())
            .filter(|&i| (intensity_edges[i].t0_ps - corr.t0_ps).abs() <= tolerance_ps)
            .collect();
        in_tolerance.sort_by(|&a, &b| {
            (intensity_edges[a].t0_ps - corr.t0_ps)
                .abs()
                .total_cmp(&(intensity_edges[b].t0_ps - corr.t0_ps).abs())
        });
        let ambiguous = in_tolerance.len() > 1;
        let partner = in_tolerance.first().copied();
        if let Some(i) = partner {
            consumed[i] = true;
        }
        for &i in &in_tolerance {
            ambiguous_intensity[i] = ambiguous;
        }
        let mut fit = corr.clone();
        fit.label = EdgeLabel::Quantum;
        labeled.push(LabeledEdge {
            fit,
            ambiguous,
            intensity_partner_ps: partner.map(|i| intensity_edges[i].t0_ps),
        });
    }

    for (i, edge) in intensity_edges.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let mut fit = edge.clone();
        fit.label = EdgeLabel::Classical;
        labeled.push(LabeledEdge {
            fit,
            ambiguous: ambiguous_intensity[i],
            intensity_partner_ps: None,
        });
    }

    labeled.sort_by(|a, b| a.fit.t0_ps.total_cmp(&b.fit.t0_ps));
    labeled
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranging::fit::FALL_TIME_FACTOR;

    fn staircase(
        times: &[i64],
        steps: &[(f64, f64)], // (edge time ps, amplitude)
        baseline: f64,
        sigma: f64,
    ) -> Vec<f64> {
        times
            .iter()
            .map(|&t| {
                let mut y = baseline;
                for &(t0, a) in steps {
                    let z = (t as f64 - t0) / (sigma * std::f64::consts::SQRT_2);
                    y += 0.5 * a * (1.0 - libm::erf(z));
                }
                y
            })
            .collect()
    }

    fn times(n: usize, step: i64) -> Vec<i64> {
        (0..n as i64).map(|i| i * step).collect()
    }

    #[test]
    fn flat_profile_yields_no_edges() {
        let t = times(300, 90);
        let flat = vec![1.0; 300];
        assert!(detect_falling_edges(&t, &flat, &DetectParams::default()).is_empty());
        let ramp: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        assert!(detect_falling_edges(&t, &ramp, &DetectParams::default()).is_empty());
    }

    #[test]
    fn two_step_staircase_yields_two_edges() {
        let t = times(300, 90);
        let y = staircase(&t, &[(16_110.0, 1.0), (24_462.0, 0.8)], 0.05, 344.0);
        let edges = detect_falling_edges(&t, &y, &DetectParams::default());
        assert_eq!(edges.len(), 2, "edges: {edges:?}");
        assert!((edges[0].t0_ps - 16_110.0).abs() < 45.0);
        assert!((edges[1].t0_ps - 24_462.0).abs() < 45.0);
        assert!((edges[1].fall_time_90_10_ps - FALL_TIME_FACTOR * 344.0).abs() < 20.0);
    }

    #[test]
    fn single_edge_on_flat_background() {
        let t = times(300, 90);
        let y = staircase(&t, &[(20_682.0, 0.6)], 0.3, 344.0);
        let edges = detect_falling_edges(&t, &y, &DetectParams::default());
        assert_eq!(edges.len(), 1);
        assert!((edges[0].t0_ps - 20_682.0).abs() < 45.0);
    }

    #[test]
    fn classify_sync_scene() {
        let t = times(300, 90);
        let intensity = detect_falling_edges(
            &t,
            &staircase(&t, &[(16_110.0, 1.0), (24_462.0, 0.8)], 0.05, 344.0),
            &DetectParams::default(),
        );
        let correlation = detect_falling_edges(
            &t,
            &staircase(&t, &[(24_462.0, 5.0)], 0.0, 344.0),
            &DetectParams::default(),
        );
        let labeled = classify_edges(&intensity, &correlation, 30.0 * 90.0);
        assert_eq!(labeled.len(), 2);
        assert_eq!(labeled[0].fit.label, EdgeLabel::Classical);
        assert!((labeled[0].fit.t0_ps - 16_110.0).abs() < 60.0);
        assert_eq!(labeled[1].fit.label, EdgeLabel::Quantum);
        assert!((labeled[1].fit.t0_ps - 24_462.0).abs() < 60.0);
        assert!(!labeled[0].ambiguous && !labeled[1].ambiguous);
    }

    #[test]
    fn no_correlation_edges_means_all_classical() {
        let t = times(300, 90);
        let intensity = detect_falling_edges(
            &t,
            &staircase(&t, &[(12_000.0, 1.0)], 0.0, 344.0),
            &DetectParams::default(),
        );
        let labeled = classify_edges(&intensity, &[], 2_700.0);
        assert_eq!(labeled.len(), 1);
        assert_eq!(labeled[0].fit.label, EdgeLabel::Classical);
    }

    #[test]
    fn lone_correlation_edge_is_still_quantum() {
        let t = times(300, 90);
        let correlation = detect_falling_edges(
            &t,
            &staircase(&t, &[(18_000.0, 4.0)], 0.0, 344.0),
            &DetectParams::default(),
        );
        let labeled = classify_edges(&[], &correlation, 2_700.0);
        assert_eq!(labeled.len(), 1);
        assert_eq!(labeled[0].fit.label, EdgeLabel::Quantum);
        assert!(labeled[0].intensity_partner_ps.is_none());
    }

    #[test]
    fn coincident_edges_get_single_quantum_label_flagged_ambiguous() {
        // Quantum and classical returns 2.25 ns apart: both intensity edges
        // sit within the 2.7 ns tolerance of the one correlation edge. The
        // fit window must be narrower than the separation to resolve them.
        let t = times(300, 90);
        let params = DetectParams { fit_window_steps: 12, merge_radius_steps: 8, ..DetectParams::default() };
        let intensity = detect_falling_edges(
            &t,
            &staircase(&t, &[(20_000.0, 1.0), (22_250.0, 0.9)], 0.05, 344.0),
            &params,
        );
        assert_eq!(intensity.len(), 2);
        let correlation = detect_falling_edges(
            &t,
            &staircase(&t, &[(22_250.0, 5.0)], 0.0, 344.0),
            &params,
        );
        assert_eq!(correlation.len(), 1);
        let labeled = classify_edges(&intensity, &correlation, 30.0 * 90.0);
        let quantum: Vec<_> =
            labeled.iter().filter(|e| e.fit.label == EdgeLabel::Quantum).collect();
        assert_eq!(quantum.len(), 1);
        assert!(labeled.iter().all(|e| e.ambiguous));
    }
}
