//! Ready-made scenes mirroring the four benchmark scenarios: quantum-only
//! ranging, classical-only illumination, a synchronized spoofing source, and
//! an asynchronous background source. The CLI presets ship the same setups
//! as config files.

use crate::sim::{
    expected_counts_per_frame, ClassicalSourceSpec, DetectorSpec, ObjectTarget, PairSourceSpec,
    Scene, SyncMode, WeightMap,
};

/// Camera model used by every benchmark scene: 25% PDP, a little dark count,
/// direct-neighbor crosstalk, mild afterpulsing, and a few hot pixels.
pub fn base_detector() -> DetectorSpec {
    DetectorSpec {
        pdp: 0.25,
        dark_rate: 5e-5,
        hot_pixels: vec![(3, 5, 150.0), (11, 2, 200.0), (7, 9, 120.0)],
        crosstalk_p: 0.002,
        afterpulse_p: 0.01,
        pulses_per_exposure: 7,
        bits_per_frame: 255,
    }
}

/// Default pair flux: mean generated pairs per laser pulse.
pub const DEFAULT_PAIR_RATE: f64 = 0.35;

/// Centered disk target for the pair beam.
fn quantum_target(width: usize, height: usize, delay_ps: i64) -> ObjectTarget {
    let mask = disk_mask(width, height, width as f64 / 2.0, height as f64 / 2.0, width as f64 * 0.42);
    ObjectTarget::new(mask, delay_ps).expect("valid reflectivity")
}

/// Off-center disk target for classical light, like a side object in the
/// field of view. Its correlation noise concentrates in the sum plane around
/// twice the object centroid with twice the object radius, so the placement
/// keeps that blob clear of the central peak window.
fn classical_target(width: usize, height: usize, delay_ps: i64) -> ObjectTarget {
    let mask =
        disk_mask(width, height, width as f64 * 0.22, height as f64 * 0.35, width as f64 * 0.15);
    ObjectTarget::new(mask, delay_ps).expect("valid reflectivity")
}

pub fn disk_mask(width: usize, height: usize, cx: f64, cy: f64, r: f64) -> WeightMap {
    let weights = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            if (x - cx).powi(2) + (y - cy).powi(2) <= r * r {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    WeightMap::new(width, height, weights).expect("grid-sized mask")
}

fn pair_source(width: usize, height: usize, pairs_per_pulse: f64, delay_ps: i64) -> PairSourceSpec {
    PairSourceSpec {
        pairs_per_pulse,
        beam_profile: WeightMap::flat(width, height),
        corr_center: ((width - 1) as i64, (height - 1) as i64),
        corr_sigma: 0.8,
        target: quantum_target(width, height, delay_ps),
    }
}

/// Photon pairs only (the quantum branch of the two-object bench).
pub fn quantum_only(width: usize, height: usize, pairs_per_pulse: f64, delay_ps: i64) -> Scene {
    let mut scene = Scene::empty(width, height);
    scene.pair_source = Some(pair_source(width, height, pairs_per_pulse, delay_ps));
    scene
}

/// Synchronized classical light only (a spoofing source with no pair return).
pub fn classical_only(width: usize, height: usize, photons_per_pulse: f64, delay_ps: i64) -> Scene {
    let mut scene = Scene::empty(width, height);
    scene.classical_sources.push(ClassicalSourceSpec {
        photons_per_pulse,
        illumination: WeightMap::flat(width, height),
        target: classical_target(width, height, delay_ps),
        sync: SyncMode::Synchronous { delay_ps },
    });
    scene
}

/// Two-object spoofing scene: a synchronized classical return plus the pair
/// return at a later range.
pub fn sync_spoof(
    width: usize,
    height: usize,
    pairs_per_pulse: f64,
    photons_per_pulse: f64,
    classical_delay_ps: i64,
    quantum_delay_ps: i64,
) -> Scene {
    let mut scene = quantum_only(width, height, pairs_per_pulse, quantum_delay_ps);
    scene.classical_sources.push(ClassicalSourceSpec {
        photons_per_pulse,
        illumination: WeightMap::flat(width, height),
        target: classical_target(width, height, classical_delay_ps),
        sync: SyncMode::Synchronous { delay_ps: classical_delay_ps },
    });
    scene
}

/// Pair return plus a free-running classical source at the same repetition
/// rate; `intensity_ratio` is the detected classical/quantum flux ratio at a
/// gate capturing both.
pub fn async_background(
    width: usize,
    height: usize,
    pairs_per_pulse: f64,
    intensity_ratio: f64,
    quantum_delay_ps: i64,
) -> Scene {
    let mut scene = quantum_only(width, height, pairs_per_pulse, quantum_delay_ps);
    let detector = base_detector();
    let gate = crate::model::GateWindow {
        start_ps: quantum_delay_ps - 1_000,
        width_ps: 15_000,
        edge_sigma_ps: 0.0,
    };
    let (quantum_flux, _) = expected_counts_per_frame(&scene, &detector, &gate);

    let period_ps = scene.laser_period_ps;
    let duty = gate.width_ps as f64 / period_ps as f64;
    let pulses = f64::from(detector.pulses_per_exposure);
    let bits = f64::from(detector.bits_per_frame);
    // classical_detected = rate * pulses * bits * pdp * duty = ratio * quantum.
    let photons_per_pulse =
        intensity_ratio * quantum_flux / (pulses * bits * detector.pdp * duty);

    scene.classical_sources.push(ClassicalSourceSpec {
        photons_per_pulse,
        illumination: WeightMap::flat(width, height),
        target: classical_target(width, height, quantum_delay_ps),
        sync: SyncMode::Asynchronous { period_ps },
    });
    scene
}

/// Absorptive half-plane pattern on a reflective surface, for the
/// spatially-resolved correlation image: reflectivity 0 where x <= boundary,
/// 1 elsewhere.
pub fn half_plane_pattern(
    width: usize,
    height: usize,
    pairs_per_pulse: f64,
    boundary: usize,
    delay_ps: i64,
) -> Scene {
    let weights = (0..width * height)
        .map(|i| if i % width <= boundary { 0.0 } else { 1.0 })
        .collect();
    let mask = WeightMap::new(width, height, weights).expect("grid-sized mask");
    let mut scene = Scene::empty(width, height);
    scene.pair_source = Some(PairSourceSpec {
        pairs_per_pulse,
        beam_profile: WeightMap::flat(width, height),
        corr_center: ((width - 1) as i64, (height - 1) as i64),
        corr_sigma: 0.8,
        target: ObjectTarget::new(mask, delay_ps).expect("valid reflectivity"),
    });
    scene
}
