//! Scan-to-depth reconstruction: per-gate profiles, erf falling-edge fits,
//! dual-profile quantum/classical classification, subtraction imaging, and
//! the final depth report.

mod edges;
mod fit;
mod profile;
mod report;
mod subtract;

pub use edges::{classify_edges, detect_falling_edges, DetectParams, LabeledEdge};
pub use fit::{fit_erf_edge, fit_erf_edge_fixed_width, smooth5, EdgeFit, FitError, FALL_TIME_FACTOR, MIN_FIT_SAMPLES};
pub use profile::{extract_profiles, stack_metrics, ProfileError, ProfileOptions, ProfileSeries};
pub use report::depth_report;
pub use subtract::{edge_subtraction_image, SubtractionImage};
