//! Soft-edged gate transmission model.

use crate::model::GateWindow;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability that a photon arriving at `arrival_ps` passes the gate:
/// Phi((a - start)/sigma) - Phi((a - start - width)/sigma), degenerating to a
/// hard [start, start + width] indicator at sigma = 0.
pub fn gate_transmission(arrival_ps: f64, gate: &GateWindow) -> f64 {
    let start = gate.start_ps as f64;
    let end = (gate.start_ps + gate.width_ps) as f64;
    if gate.edge_sigma_ps == 0.0 {
        if arrival_ps >= start && arrival_ps <= end {
            1.0
        } else {
            0.0
        }
    } else {
        let s = gate.edge_sigma_ps;
        normal_cdf((arrival_ps - start) / s) - normal_cdf((arrival_ps - end) / s)
    }
}

/// Transmission of a periodic pulse train: the photon repeats every
/// `period_ps`, and the gate may catch any repetition. A non-positive period
/// disables the periodic extension.
pub fn periodic_transmission(arrival_ps: f64, gate: &GateWindow, period_ps: i64) -> f64 {
    if period_ps <= 0 {
        return gate_transmission(arrival_ps, gate);
    }
    let period = period_ps as f64;
    let margin = 6.0 * gate.edge_sigma_ps;
    let lo = gate.start_ps as f64 - margin;
    let hi = (gate.start_ps + gate.width_ps) as f64 + margin;
    let k_min = ((lo - arrival_ps) / period).floor() as i64 - 1;
    let k_max = ((hi - arrival_ps) / period).ceil() as i64 + 1;
    let mut total = 0.0;
    for k in k_min..=k_max {
        total += gate_transmission(arrival_ps + k as f64 * period, gate);
    }
    total.min(1.0)
}
