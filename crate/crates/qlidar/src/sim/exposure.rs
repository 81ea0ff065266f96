//! Single 1-bit exposure Monte Carlo.
//!
//! The gate's soft edges model trigger jitter: each exposure draws one edge
//! offset common to every photon in it, and the window is hard around that
//! offset. Simultaneous photons (both halves of a pair) therefore pass or
//! fail together, and both the intensity and the coincidence profiles fall
//! as the same normal-CDF edge, which is what the gate-scan measurements
//! show. The per-photon marginal transmission is still
//! [`super::gate::gate_transmission`].
//!
//! Photon generation is thinned analytically where the acceptance is
//! position-independent, so the inner loop only touches photons with a
//! chance of being recorded. All randomness flows through the caller's RNG
//! in a fixed draw order, which keeps frames reproducible.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::model::{Frame, GateWindow};

use super::scene::{DetectorSpec, Scene, SimError, SyncMode, WeightMap};

/// Cumulative-weight sampler over pixel positions.
struct PositionSampler {
    cdf: Vec<f64>,
    total: f64,
    width: usize,
}

impl PositionSampler {
    fn new(map: &WeightMap) -> Result<Self, SimError> {
        let mut cdf = Vec::with_capacity(map.weights().len());
        let mut acc = 0.0;
        for &w in map.weights() {
            acc += w.max(0.0);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(SimError::DegenerateWeights);
        }
        Ok(Self { cdf, total: acc, width: map.width() })
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let u: f64 = rng.gen::<f64>() * self.total;
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        (idx % self.width, idx / self.width)
    }
}

struct PairCtx {
    count: Option<Poisson<f64>>,
    beam: PositionSampler,
    center: (i64, i64),
    noise: Option<Normal<f64>>,
    arrival_ps: f64,
    pdp: f64,
    mask: WeightMap,
}

struct ClassicalCtx {
    /// Candidate photons, already thinned by pdp.
    count: Option<Poisson<f64>>,
    positions: PositionSampler,
    timing: ClassicalTiming,
}

enum ClassicalTiming {
    /// Fixed arrival; passes whenever the jittered window covers it.
    Synchronous { arrival_ps: f64 },
    /// Uniform phase per photon; the pulse train repeats every period.
    Asynchronous { period_ps: f64 },
}

struct HotPixelCtx {
    index: u32,
    fire_p: f64,
}

/// Precomputed per-gate simulation context. Exposures within one frame are
/// generated by repeated calls against caller-held [`ExposureState`].
pub struct ExposureCtx {
    width: usize,
    height: usize,
    gate_start_ps: f64,
    gate_width_ps: f64,
    edge_jitter: Option<Normal<f64>>,
    pair: Option<PairCtx>,
    classical: Vec<ClassicalCtx>,
    dark_count: Option<Poisson<f64>>,
    hot_lookup: Vec<bool>,
    hot_pixels: Vec<HotPixelCtx>,
    crosstalk_p: f64,
    afterpulse_p: f64,
    pub bits_per_frame: u32,
}

/// Reusable scratch for one frame's worth of exposures.
pub struct ExposureState {
    grid: Vec<u8>,
    fired: Vec<u32>,
    prev_fired: Vec<u32>,
}

impl ExposureState {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            grid: vec![0; width * height],
            fired: Vec::with_capacity(256),
            prev_fired: Vec::with_capacity(256),
        }
    }

    /// Forget the previous exposure; afterpulsing never crosses frames.
    pub fn reset_frame(&mut self) {
        self.prev_fired.clear();
        self.fired.clear();
    }
}

impl ExposureCtx {
    pub fn new(scene: &Scene, detector: &DetectorSpec, gate: GateWindow) -> Result<Self, SimError> {
        scene.validate()?;
        detector.validate(scene.width, scene.height)?;
        let pulses = f64::from(detector.pulses_per_exposure);

        let pair = match &scene.pair_source {
            Some(spec) => Some(PairCtx {
                count: poisson(spec.pairs_per_pulse * pulses),
                beam: PositionSampler::new(&spec.beam_profile)?,
                center: spec.corr_center,
                noise: if spec.corr_sigma > 0.0 {
                    Some(Normal::new(0.0, spec.corr_sigma).expect("finite sigma"))
                } else {
                    None
                },
                arrival_ps: spec.target.range_delay_ps as f64,
                pdp: detector.pdp,
                mask: spec.target.mask.clone(),
            }),
            None => None,
        };

        let classical = scene
            .classical_sources
            .iter()
            .map(|spec| {
                let positions = PositionSampler::new(&spec.illumination.product(&spec.target.mask))?;
                let timing = match spec.sync {
                    SyncMode::Synchronous { delay_ps } => {
                        ClassicalTiming::Synchronous { arrival_ps: delay_ps as f64 }
                    }
                    SyncMode::Asynchronous { period_ps } => {
                        ClassicalTiming::Asynchronous { period_ps: period_ps as f64 }
                    }
                };
                Ok(ClassicalCtx {
                    count: poisson(spec.photons_per_pulse * pulses * detector.pdp),
                    positions,
                    timing,
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;

        let hot_lookup = {
            let mut lookup = vec![false; scene.width * scene.height];
            for &(x, y, _) in &detector.hot_pixels {
                lookup[y * scene.width + x] = true;
            }
            lookup
        };
        let hot_pixels = detector
            .hot_pixels
            .iter()
            .map(|&(x, y, mult)| HotPixelCtx {
                index: (y * scene.width + x) as u32,
                fire_p: 1.0 - (-detector.dark_rate * mult).exp(),
            })
            .collect();
        let n_normal = (scene.width * scene.height - detector.hot_pixels.len()) as f64;

        Ok(Self {
            width: scene.width,
            height: scene.height,
            gate_start_ps: gate.start_ps as f64,
            gate_width_ps: gate.width_ps as f64,
            edge_jitter: if gate.edge_sigma_ps > 0.0 {
                Some(Normal::new(0.0, gate.edge_sigma_ps).expect("finite sigma"))
            } else {
                None
            },
            pair,
            classical,
            dark_count: poisson(n_normal * detector.dark_rate),
            hot_lookup,
            hot_pixels,
            crosstalk_p: detector.crosstalk_p,
            afterpulse_p: detector.afterpulse_p,
            bits_per_frame: detector.bits_per_frame,
        })
    }

    #[inline]
    fn fire(&self, state: &mut ExposureState, index: u32) {
        let slot = &mut state.grid[index as usize];
        if *slot == 0 {
            *slot = 1;
            state.fired.push(index);
        }
    }

    /// Run one 1-bit exposure and add its detections into `frame_accum`
    /// (one u8 count per pixel, capped by construction at bits_per_frame).
    pub fn run_exposure<R: Rng>(
        &self,
        rng: &mut R,
        state: &mut ExposureState,
        frame_accum: &mut [u8],
    ) {
        std::mem::swap(&mut state.fired, &mut state.prev_fired);
        state.fired.clear();

        // One common edge offset per exposure.
        let gate_lo = match &self.edge_jitter {
            Some(jitter) => self.gate_start_ps + jitter.sample(rng),
            None => self.gate_start_ps,
        };
        let gate_hi = gate_lo + self.gate_width_ps;

        // Photon pairs: the pair passes the gate as a whole; each photon is
        // then detected through reflectivity and PDP independently.
        if let Some(pair) = &self.pair {
            if let Some(count) = &pair.count {
                if pair.arrival_ps >= gate_lo && pair.arrival_ps <= gate_hi {
                    let n = count.sample(rng) as u64;
                    for _ in 0..n {
                        let (x1, y1) = pair.beam.sample(rng);
                        let (mut x2, mut y2) =
                            (pair.center.0 - x1 as i64, pair.center.1 - y1 as i64);
                        if let Some(noise) = &pair.noise {
                            x2 += noise.sample(rng).round() as i64;
                            y2 += noise.sample(rng).round() as i64;
                        }
                        let p1 = pair.mask.get(x1, y1) * pair.pdp;
                        if p1 > 0.0 && rng.gen::<f64>() < p1 {
                            self.fire(state, (y1 * self.width + x1) as u32);
                        }
                        // Off-grid partners are dropped, not clamped.
                        if x2 >= 0
                            && y2 >= 0
                            && (x2 as usize) < self.width
                            && (y2 as usize) < self.height
                        {
                            let (x2, y2) = (x2 as usize, y2 as usize);
                            let p2 = pair.mask.get(x2, y2) * pair.pdp;
                            if p2 > 0.0 && rng.gen::<f64>() < p2 {
                                self.fire(state, (y2 * self.width + x2) as u32);
                            }
                        }
                    }
                }
            }
        }

        // Classical sources.
        for source in &self.classical {
            if let Some(count) = &source.count {
                match source.timing {
                    ClassicalTiming::Synchronous { arrival_ps } => {
                        if arrival_ps >= gate_lo && arrival_ps <= gate_hi {
                            let n = count.sample(rng) as u64;
                            for _ in 0..n {
                                let (x, y) = source.positions.sample(rng);
                                self.fire(state, (y * self.width + x) as u32);
                            }
                        }
                    }
                    ClassicalTiming::Asynchronous { period_ps } => {
                        let n = count.sample(rng) as u64;
                        for _ in 0..n {
                            let phase = rng.gen::<f64>() * period_ps;
                            // Some repetition of the pulse train lands in
                            // the gate iff the phase relative to the gate
                            // start wraps into the window.
                            let offset = (phase - gate_lo).rem_euclid(period_ps);
                            if offset > self.gate_width_ps {
                                continue;
                            }
                            let (x, y) = source.positions.sample(rng);
                            self.fire(state, (y * self.width + x) as u32);
                        }
                    }
                }
            }
        }

        // Dark counts: one Poisson total over normal pixels, positions
        // uniform; hot pixels carry their own rates.
        if let Some(dark) = &self.dark_count {
            let n = dark.sample(rng) as u64;
            let npix = (self.width * self.height) as u32;
            for _ in 0..n {
                loop {
                    let idx = rng.gen_range(0..npix);
                    if !self.hot_lookup[idx as usize] {
                        self.fire(state, idx);
                        break;
                    }
                }
            }
        }
        for hot in &self.hot_pixels {
            if hot.fire_p > 0.0 && rng.gen::<f64>() < hot.fire_p {
                self.fire(state, hot.index);
            }
        }

        // Afterpulsing from the previous exposure of this frame.
        if self.afterpulse_p > 0.0 {
            for i in 0..state.prev_fired.len() {
                let idx = state.prev_fired[i];
                if rng.gen::<f64>() < self.afterpulse_p {
                    self.fire(state, idx);
                }
            }
        }

        // Crosstalk, applied once to the real detections (no cascades).
        if self.crosstalk_p > 0.0 {
            let real = state.fired.len();
            for i in 0..real {
                let idx = state.fired[i] as usize;
                let (x, y) = (idx % self.width, idx / self.width);
                let neighbors = [
                    (x.wrapping_sub(1), y),
                    (x + 1, y),
                    (x, y.wrapping_sub(1)),
                    (x, y + 1),
                ];
                for (nx, ny) in neighbors {
                    if nx < self.width && ny < self.height && rng.gen::<f64>() < self.crosstalk_p {
                        self.fire(state, (ny * self.width + nx) as u32);
                    }
                }
            }
        }

        for &idx in &state.fired {
            frame_accum[idx as usize] += 1;
            state.grid[idx as usize] = 0;
        }
    }
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    if mean > 0.0 {
        Some(Poisson::new(mean).expect("finite positive mean"))
    } else {
        None
    }
}

/// One-off 1-bit exposure, as used by tests and small experiments; stack
/// acquisition builds the context once instead.
pub fn simulate_bit_exposure<R: Rng>(
    scene: &Scene,
    detector: &DetectorSpec,
    gate: GateWindow,
    rng: &mut R,
) -> Result<Frame, SimError> {
    let ctx = ExposureCtx::new(scene, detector, gate)?;
    let mut state = ExposureState::new(scene.width, scene.height);
    let mut accum = vec![0u8; scene.width * scene.height];
    ctx.run_exposure(rng, &mut state, &mut accum);
    Ok(Frame::new(scene.width, scene.height, 1, accum).expect("grid-sized binary frame"))
}
