//! Time-of-flight to depth conversion and the final ranging report.

use super::frame::ModelError;

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Round-trip conversion factor: millimeters of depth per picosecond of
/// arrival time, d = c*t/2.
pub const MM_PER_PS: f64 = SPEED_OF_LIGHT_M_PER_S * 1e-12 * 1e3 / 2.0;

/// Convert a round-trip arrival time to target depth, d = c*t/2.
pub fn time_to_depth(t_ps: i64) -> Result<f64, ModelError> {
    if t_ps < 0 {
        return Err(ModelError::NegativeTime(t_ps));
    }
    Ok(t_ps as f64 * MM_PER_PS)
}

/// Same conversion for fractional arrival times (fitted edge midpoints).
pub fn depth_mm(t_ps: f64) -> f64 {
    t_ps * MM_PER_PS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    Quantum,
    Classical,
    Unlabeled,
}

impl std::fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeLabel::Quantum => write!(f, "quantum"),
            EdgeLabel::Classical => write!(f, "classical"),
            EdgeLabel::Unlabeled => write!(f, "unlabeled"),
        }
    }
}

/// One ranged return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthEntry {
    pub arrival_ps: f64,
    pub depth_mm: f64,
    pub label: EdgeLabel,
    pub ambiguous: bool,
    /// Path or name of the subtraction image isolating this return, if any.
    pub subtraction_ref: Option<String>,
}

/// Depths of every detected edge, sorted by arrival time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DepthReport {
    pub entries: Vec<DepthEntry>,
}
