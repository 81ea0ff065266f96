//! Scenario configuration: a TOML document with detector, schedule, source,
//! acquisition, and pipeline sections. Time fields are strings with a
//! mandatory unit suffix (ps, ns, us) and normalize to integer picoseconds on
//! load; gate edge softness may be fractional.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::corr::{Method, Neighborhood};
use crate::model::{GateSchedule, GateWindow};
use crate::ranging::{DetectParams, ProfileOptions};
use crate::sim::{
    ClassicalSourceSpec, DetectorSpec, ObjectTarget, PairSourceSpec, Scene, SimError, SyncMode,
    WeightMap,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("{key}: {source}")]
    Scene { key: String, source: SimError },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Parse a time with a mandatory unit suffix to fractional picoseconds.
fn parse_time_f64(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let trimmed = raw.trim();
    let (number, scale) = if let Some(v) = trimmed.strip_suffix("ps") {
        (v, 1.0)
    } else if let Some(v) = trimmed.strip_suffix("ns") {
        (v, 1e3)
    } else if let Some(v) = trimmed.strip_suffix("us") {
        (v, 1e6)
    } else {
        return Err(invalid(key, format!("`{raw}` lacks a time unit suffix (ps, ns, us)")));
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| invalid(key, format!("`{raw}` is not a number with a unit")))?;
    Ok(value * scale)
}

/// Parse a time that must land on the integer picosecond grid.
fn parse_time_ps(key: &str, raw: &str) -> Result<i64, ConfigError> {
    let ps = parse_time_f64(key, raw)?;
    let rounded = ps.round();
    if (ps - rounded).abs() > 1e-6 {
        return Err(invalid(key, format!("`{raw}` is not an integer number of picoseconds")));
    }
    Ok(rounded as i64)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotPixelConfig {
    pub x: usize,
    pub y: usize,
    pub multiplier: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub width: usize,
    pub height: usize,
    pub pdp: f64,
    #[serde(default)]
    pub dark_rate: f64,
    #[serde(default)]
    pub crosstalk_p: f64,
    #[serde(default)]
    pub afterpulse_p: f64,
    #[serde(default = "default_pulses")]
    pub pulses_per_exposure: u32,
    #[serde(default = "default_bits")]
    pub bits_per_frame: u32,
    #[serde(default = "default_laser_period")]
    pub laser_period: String,
    #[serde(default)]
    pub hot_pixels: Vec<HotPixelConfig>,
}

fn default_pulses() -> u32 {
    7
}

fn default_bits() -> u32 {
    255
}

fn default_laser_period() -> String {
    "50 ns".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub start: String,
    pub step: String,
    pub count: usize,
    pub gate_width: String,
    #[serde(default)]
    pub gate_edge_sigma: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BeamConfig {
    Flat,
    Gaussian { sigma: f64 },
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig::Flat
    }
}

fn default_inside() -> f64 {
    1.0
}

/// Procedural reflectivity masks.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskConfig {
    Full,
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
        #[serde(default = "default_inside")]
        inside: f64,
        #[serde(default)]
        outside: f64,
    },
    Rect {
        x0: usize,
        y0: usize,
        w: usize,
        h: usize,
        #[serde(default = "default_inside")]
        inside: f64,
        #[serde(default)]
        outside: f64,
    },
    /// Pixels with coordinate <= boundary along the axis take `inside`.
    HalfPlane {
        axis: Axis,
        boundary: usize,
        #[serde(default = "default_inside")]
        inside: f64,
        #[serde(default)]
        outside: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

impl MaskConfig {
    pub fn build(&self, width: usize, height: usize) -> WeightMap {
        let weights = (0..width * height)
            .map(|i| {
                let (x, y) = (i % width, i / width);
                match *self {
                    MaskConfig::Full => 1.0,
                    MaskConfig::Disk { cx, cy, r, inside, outside } => {
                        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                        if d2 <= r * r {
                            inside
                        } else {
                            outside
                        }
                    }
                    MaskConfig::Rect { x0, y0, w, h, inside, outside } => {
                        if x >= x0 && x < x0 + w && y >= y0 && y < y0 + h {
                            inside
                        } else {
                            outside
                        }
                    }
                    MaskConfig::HalfPlane { axis, boundary, inside, outside } => {
                        let coord = match axis {
                            Axis::X => x,
                            Axis::Y => y,
                        };
                        if coord <= boundary {
                            inside
                        } else {
                            outside
                        }
                    }
                }
            })
            .collect();
        WeightMap::new(width, height, weights).expect("grid-sized mask")
    }
}

impl BeamConfig {
    pub fn build(&self, width: usize, height: usize) -> WeightMap {
        match *self {
            BeamConfig::Flat => WeightMap::flat(width, height),
            BeamConfig::Gaussian { sigma } => WeightMap::gaussian(width, height, sigma),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSourceConfig {
    pub pairs_per_pulse: f64,
    pub corr_sigma: f64,
    #[serde(default)]
    pub corr_center: Option<[i64; 2]>,
    pub range_delay: String,
    #[serde(default)]
    pub beam: BeamConfig,
    #[serde(default = "default_mask")]
    pub mask: MaskConfig,
}

fn default_mask() -> MaskConfig {
    MaskConfig::Full
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SyncConfig {
    Synchronous { delay: String },
    Asynchronous { period: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSourceConfig {
    pub photons_per_pulse: f64,
    pub sync: SyncConfig,
    #[serde(default)]
    pub illumination: BeamConfig,
    #[serde(default = "default_mask")]
    pub mask: MaskConfig,
    /// Arrival delay of the reflected light; asynchronous sources only use
    /// it as the nominal target range.
    #[serde(default)]
    pub range_delay: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub n_frames: usize,
    pub seed: u64,
    #[serde(default)]
    pub dark_frames: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_hot_threshold")]
    pub hot_pixel_threshold: u32,
    #[serde(default = "default_search")]
    pub peak_search: usize,
    #[serde(default = "default_search")]
    pub peak_exclusion: usize,
    #[serde(default = "default_neighborhood")]
    pub crosstalk_neighborhood: String,
    #[serde(default)]
    pub remove_self_pairs: bool,
    #[serde(default = "default_fit_window")]
    pub fit_window: usize,
    #[serde(default = "default_merge_radius")]
    pub merge_radius: usize,
    #[serde(default = "default_tolerance")]
    pub classify_tolerance: usize,
    #[serde(default = "default_offset")]
    pub subtraction_offset: usize,
    #[serde(default = "default_snr_threshold")]
    pub snr_threshold: f64,
}

fn default_method() -> String {
    "fft".to_string()
}

fn default_hot_threshold() -> u32 {
    200
}

fn default_search() -> usize {
    4
}

fn default_neighborhood() -> String {
    "four".to_string()
}

fn default_fit_window() -> usize {
    60
}

fn default_merge_radius() -> usize {
    20
}

fn default_tolerance() -> usize {
    30
}

fn default_offset() -> usize {
    45
}

fn default_snr_threshold() -> f64 {
    3.0
}

impl Default for PipelineConfig {
    fn default() -> Self {
        toml::from_str("").expect("all pipeline fields carry defaults")
    }
}

/// The full scenario document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub detector: DetectorConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub pair_source: Option<PairSourceConfig>,
    #[serde(default)]
    pub classical_sources: Vec<ClassicalSourceConfig>,
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

/// Everything a run needs, with times normalized and maps materialized.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub scene: Scene,
    pub detector: DetectorSpec,
    pub schedule: GateSchedule,
    pub n_frames: usize,
    pub dark_frames: usize,
    pub seed: u64,
    pub pipeline: PipelineSettings,
}

#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub profile: ProfileOptions,
    pub detect: DetectParams,
    pub hot_pixel_threshold: u32,
    pub classify_tolerance_steps: usize,
    pub subtraction_offset_steps: usize,
    pub snr_threshold: f64,
}

impl ScenarioConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<BuiltScenario, ConfigError> {
        let (w, h) = (self.detector.width, self.detector.height);
        if w == 0 || h == 0 {
            return Err(invalid("detector.width", "grid dimensions must be positive"));
        }

        let laser_period_ps = parse_time_ps("detector.laser_period", &self.detector.laser_period)?;
        let detector = DetectorSpec {
            pdp: self.detector.pdp,
            dark_rate: self.detector.dark_rate,
            hot_pixels: self
                .detector
                .hot_pixels
                .iter()
                .map(|hp| (hp.x, hp.y, hp.multiplier))
                .collect(),
            crosstalk_p: self.detector.crosstalk_p,
            afterpulse_p: self.detector.afterpulse_p,
            pulses_per_exposure: self.detector.pulses_per_exposure,
            bits_per_frame: self.detector.bits_per_frame,
        };
        detector
            .validate(w, h)
            .map_err(|source| ConfigError::Scene { key: "detector".to_string(), source })?;

        let edge_sigma = match &self.schedule.gate_edge_sigma {
            Some(raw) => parse_time_f64("schedule.gate_edge_sigma", raw)?,
            None => 0.0,
        };
        let window = GateWindow::new(
            0,
            parse_time_ps("schedule.gate_width", &self.schedule.gate_width)?,
            edge_sigma,
        )?;
        let schedule = GateSchedule::new(
            parse_time_ps("schedule.start", &self.schedule.start)?,
            parse_time_ps("schedule.step", &self.schedule.step)?,
            self.schedule.count,
            window,
        )?;

        let pair_source = match &self.pair_source {
            Some(cfg) => {
                let target = ObjectTarget::new(
                    cfg.mask.build(w, h),
                    parse_time_ps("pair_source.range_delay", &cfg.range_delay)?,
                )
                .map_err(|source| ConfigError::Scene { key: "pair_source.mask".into(), source })?;
                Some(PairSourceSpec {
                    pairs_per_pulse: cfg.pairs_per_pulse,
                    beam_profile: cfg.beam.build(w, h),
                    corr_center: cfg
                        .corr_center
                        .map(|c| (c[0], c[1]))
                        .unwrap_or(((w - 1) as i64, (h - 1) as i64)),
                    corr_sigma: cfg.corr_sigma,
                    target,
                })
            }
            None => None,
        };

        let classical_sources = self
            .classical_sources
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let key = format!("classical_sources[{i}]");
                let sync = match &cfg.sync {
                    SyncConfig::Synchronous { delay } => SyncMode::Synchronous {
                        delay_ps: parse_time_ps(&format!("{key}.sync.delay"), delay)?,
                    },
                    SyncConfig::Asynchronous { period } => SyncMode::Asynchronous {
                        period_ps: parse_time_ps(&format!("{key}.sync.period"), period)?,
                    },
                };
                let delay_ps = match (&cfg.range_delay, sync) {
                    (Some(raw), _) => parse_time_ps(&format!("{key}.range_delay"), raw)?,
                    (None, SyncMode::Synchronous { delay_ps }) => delay_ps,
                    (None, SyncMode::Asynchronous { .. }) => 0,
                };
                let target = ObjectTarget::new(cfg.mask.build(w, h), delay_ps)
                    .map_err(|source| ConfigError::Scene { key: format!("{key}.mask"), source })?;
                Ok(ClassicalSourceSpec {
                    photons_per_pulse: cfg.photons_per_pulse,
                    illumination: cfg.illumination.build(w, h),
                    target,
                    sync,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let scene = Scene { width: w, height: h, laser_period_ps, pair_source, classical_sources };
        scene
            .validate()
            .map_err(|source| ConfigError::Scene { key: "scene".to_string(), source })?;

        if self.acquisition.n_frames < 2 {
            return Err(invalid("acquisition.n_frames", "need at least 2 frames"));
        }

        let method: Method = self
            .pipeline
            .method
            .parse()
            .map_err(|e: String| invalid("pipeline.method", e))?;
        let eight_connected = match self.pipeline.crosstalk_neighborhood.as_str() {
            "four" => false,
            "eight" => true,
            other => {
                return Err(invalid(
                    "pipeline.crosstalk_neighborhood",
                    format!("`{other}` (expected `four` or `eight`)"),
                ))
            }
        };

        Ok(BuiltScenario {
            scene,
            detector,
            schedule,
            n_frames: self.acquisition.n_frames,
            dark_frames: self.acquisition.dark_frames.unwrap_or(self.acquisition.n_frames),
            seed: self.acquisition.seed,
            pipeline: PipelineSettings {
                profile: ProfileOptions {
                    method,
                    crosstalk: Neighborhood {
                        eight_connected,
                        include_self: self.pipeline.remove_self_pairs,
                    },
                    exclusion: self.pipeline.peak_exclusion,
                    search: self.pipeline.peak_search,
                },
                detect: DetectParams {
                    fit_window_steps: self.pipeline.fit_window,
                    merge_radius_steps: self.pipeline.merge_radius,
                    noise_multiplier: 3.0,
                },
                hot_pixel_threshold: self.pipeline.hot_pixel_threshold,
                classify_tolerance_steps: self.pipeline.classify_tolerance,
                subtraction_offset_steps: self.pipeline.subtraction_offset,
                snr_threshold: self.pipeline.snr_threshold,
            },
        })
    }
}
