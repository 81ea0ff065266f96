//! Monte Carlo generator of gated SPAD frame stacks for scenes containing a
//! photon-pair source, classical interference sources (synchronous or
//! asynchronous), and detector defects.

mod acquire;
mod exposure;
mod gate;
mod scene;

pub use acquire::{
    acquire_stack, acquire_stack_at_gate_index, frame_rng, simulate_linear_scan, ScanDataset,
};
pub use exposure::{simulate_bit_exposure, ExposureCtx, ExposureState};
pub use gate::{gate_transmission, normal_cdf, periodic_transmission};
pub use scene::{
    ClassicalSourceSpec, DetectorSpec, ObjectTarget, PairSourceSpec, Scene, SimError, SyncMode,
    WeightMap,
};

/// Expected detected photons per 8-bit frame from each source class, before
/// 1-bit clipping. Used for flux calibration and sanity bands in tests.
pub fn expected_counts_per_frame(
    scene: &Scene,
    detector: &DetectorSpec,
    gate: &crate::model::GateWindow,
) -> (f64, f64) {
    let pulses = f64::from(detector.pulses_per_exposure);
    let bits = f64::from(detector.bits_per_frame);
    let period = scene.laser_period_ps;

    let quantum = scene.pair_source.as_ref().map_or(0.0, |pair| {
        let trans = periodic_transmission(pair.target.range_delay_ps as f64, gate, period);
        // Each generated pair contributes two detection attempts through the
        // beam-weighted reflectivity.
        let beam_total: f64 = pair.beam_profile.weights().iter().sum();
        let mean_refl: f64 = pair
            .beam_profile
            .weights()
            .iter()
            .zip(pair.target.mask.weights())
            .map(|(b, m)| b * m)
            .sum::<f64>()
            / beam_total;
        pair.pairs_per_pulse * pulses * bits * 2.0 * mean_refl * detector.pdp * trans
    });

    let classical = scene
        .classical_sources
        .iter()
        .map(|src| {
            let trans = match src.sync {
                SyncMode::Synchronous { delay_ps } => {
                    periodic_transmission(delay_ps as f64, gate, period)
                }
                SyncMode::Asynchronous { period_ps } => {
                    gate.width_ps as f64 / period_ps as f64
                }
            };
            src.photons_per_pulse * pulses * bits * detector.pdp * trans
        })
        .sum();

    (quantum, classical)
}
