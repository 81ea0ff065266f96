//! Scene and detector descriptions consumed by the Monte Carlo simulator.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{field} must be a probability in [0, 1], got {value}")]
    BadProbability { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    NegativeRate { field: &'static str, value: f64 },
    #[error("reflectivity map length {got} does not match {width}x{height}")]
    BadMapLength { width: usize, height: usize, got: usize },
    #[error("reflectivity values must lie in [0, 1]")]
    BadReflectivity,
    #[error("weight map must contain at least one positive weight")]
    DegenerateWeights,
    #[error("corr_sigma must be non-negative, got {0}")]
    BadCorrSigma(f64),
    #[error("asynchronous period must be positive, got {0} ps")]
    BadPeriod(i64),
    #[error("hot pixel ({x}, {y}) lies outside the {width}x{height} grid")]
    HotPixelOutOfGrid { x: usize, y: usize, width: usize, height: usize },
    #[error("acquisition requires at least 2 frames, got {0}")]
    TooFewFrames(usize),
}

fn check_prob(field: &'static str, value: f64) -> Result<(), SimError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(SimError::BadProbability { field, value });
    }
    Ok(())
}

fn check_rate(field: &'static str, value: f64) -> Result<(), SimError> {
    if !(value >= 0.0) {
        return Err(SimError::NegativeRate { field, value });
    }
    Ok(())
}

/// Per-pixel weight map (beam profile, illumination, reflectivity).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self, SimError> {
        if weights.len() != width * height {
            return Err(SimError::BadMapLength { width, height, got: weights.len() });
        }
        Ok(Self { width, height, weights })
    }

    pub fn flat(width: usize, height: usize) -> Self {
        Self { width, height, weights: vec![1.0; width * height] }
    }

    /// Centered isotropic Gaussian profile.
    pub fn gaussian(width: usize, height: usize, sigma: f64) -> Self {
        let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
        let weights = (0..width * height)
            .map(|i| {
                let (x, y) = ((i % width) as f64, (i / width) as f64);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                (-d2 / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        Self { width, height, weights }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().sum::<f64>() / self.weights.len() as f64
    }

    fn validate_reflectivity(&self) -> Result<(), SimError> {
        if self.weights.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(SimError::BadReflectivity);
        }
        Ok(())
    }

    /// Product of two weight maps, for position distributions like
    /// illumination * reflectivity.
    pub fn product(&self, other: &WeightMap) -> WeightMap {
        debug_assert_eq!(self.weights.len(), other.weights.len());
        WeightMap {
            width: self.width,
            height: self.height,
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a * b).collect(),
        }
    }
}

/// A reflective target: per-pixel reflectivity and round-trip arrival time of
/// its return at the camera.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTarget {
    pub mask: WeightMap,
    pub range_delay_ps: i64,
}

impl ObjectTarget {
    pub fn new(mask: WeightMap, range_delay_ps: i64) -> Result<Self, SimError> {
        mask.validate_reflectivity()?;
        Ok(Self { mask, range_delay_ps })
    }
}

/// Entangled photon-pair source: pairs arrive anti-correlated about the sum
/// coordinate `corr_center`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSourceSpec {
    pub pairs_per_pulse: f64,
    pub beam_profile: WeightMap,
    /// Sum coordinate s0 = r1 + r2, in pixels.
    pub corr_center: (i64, i64),
    /// Anti-correlation width in pixels.
    pub corr_sigma: f64,
    pub target: ObjectTarget,
}

impl PairSourceSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        check_rate("pairs_per_pulse", self.pairs_per_pulse)?;
        if !(self.corr_sigma >= 0.0) {
            return Err(SimError::BadCorrSigma(self.corr_sigma));
        }
        if !self.beam_profile.weights.iter().any(|&w| w > 0.0) {
            return Err(SimError::DegenerateWeights);
        }
        Ok(())
    }
}

/// Timing of a classical interference source relative to the camera trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyncMode {
    /// Spoofing-style source locked to the camera; photons arrive at `delay`.
    Synchronous { delay_ps: i64 },
    /// Free-running source at the same repetition rate; arrival phase is
    /// uniform over one period.
    Asynchronous { period_ps: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSourceSpec {
    pub photons_per_pulse: f64,
    pub illumination: WeightMap,
    pub target: ObjectTarget,
    pub sync: SyncMode,
}

impl ClassicalSourceSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        check_rate("photons_per_pulse", self.photons_per_pulse)?;
        if let SyncMode::Asynchronous { period_ps } = self.sync {
            if period_ps <= 0 {
                return Err(SimError::BadPeriod(period_ps));
            }
        }
        Ok(())
    }
}

/// SPAD array model.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    /// Photon detection probability.
    pub pdp: f64,
    /// Mean dark counts per pixel per 1-bit exposure.
    pub dark_rate: f64,
    /// (x, y, dark-rate multiplier) for hot pixels.
    pub hot_pixels: Vec<(usize, usize, f64)>,
    /// Probability that a detection also triggers each direct 4-neighbor.
    pub crosstalk_p: f64,
    /// Probability that a pixel which fired in the previous 1-bit exposure
    /// of the same frame re-fires.
    pub afterpulse_p: f64,
    /// Laser pulses per 1-bit exposure, floor(exposure / laser period).
    pub pulses_per_exposure: u32,
    /// 1-bit exposures accumulated per output frame.
    pub bits_per_frame: u32,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            pdp: 0.25,
            dark_rate: 0.0,
            hot_pixels: Vec::new(),
            crosstalk_p: 0.0,
            afterpulse_p: 0.0,
            pulses_per_exposure: 7, // floor(350 ns / 50 ns)
            bits_per_frame: 255,
        }
    }
}

impl DetectorSpec {
    pub fn validate(&self, width: usize, height: usize) -> Result<(), SimError> {
        check_prob("pdp", self.pdp)?;
        check_rate("dark_rate", self.dark_rate)?;
        check_prob("crosstalk_p", self.crosstalk_p)?;
        check_prob("afterpulse_p", self.afterpulse_p)?;
        for &(x, y, mult) in &self.hot_pixels {
            check_rate("hot pixel multiplier", mult)?;
            if x >= width || y >= height {
                return Err(SimError::HotPixelOutOfGrid { x, y, width, height });
            }
        }
        Ok(())
    }
}

/// Complete scene: field-of-view size, laser period, and light sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    /// Repetition period of the pulsed sources; arrivals repeat modulo this.
    pub laser_period_ps: i64,
    pub pair_source: Option<PairSourceSpec>,
    pub classical_sources: Vec<ClassicalSourceSpec>,
}

impl Scene {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            laser_period_ps: 50_000,
            pair_source: None,
            classical_sources: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Some(pair) = &self.pair_source {
            pair.validate()?;
        }
        for source in &self.classical_sources {
            source.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_validation_catches_bad_probabilities() {
        let mut det = DetectorSpec { pdp: 1.5, ..DetectorSpec::default() };
        assert!(matches!(det.validate(4, 4), Err(SimError::BadProbability { .. })));
        det.pdp = 0.25;
        det.hot_pixels = vec![(5, 0, 10.0)];
        assert!(matches!(det.validate(4, 4), Err(SimError::HotPixelOutOfGrid { .. })));
    }

    #[test]
    fn reflectivity_bounds_enforced() {
        let map = WeightMap::new(2, 2, vec![0.0, 0.5, 1.0, 1.1]).unwrap();
        assert_eq!(ObjectTarget::new(map, 0).unwrap_err(), SimError::BadReflectivity);
    }

    #[test]
    fn async_period_must_be_positive() {
        let src = ClassicalSourceSpec {
            photons_per_pulse: 0.1,
            illumination: WeightMap::flat(2, 2),
            target: ObjectTarget::new(WeightMap::flat(2, 2), 0).unwrap(),
            sync: SyncMode::Asynchronous { period_ps: 0 },
        };
        assert_eq!(src.validate().unwrap_err(), SimError::BadPeriod(0));
    }
}
