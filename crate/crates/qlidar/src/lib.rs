//! Desk-scale photon-pair LiDAR: a stochastic simulator of gated SPAD frame
//! acquisition under entangled-pair illumination plus classical interference,
//! and a reconstruction pipeline that uses spatial photon-pair correlations to
//! range a target while rejecting synchronous (spoofing) and asynchronous
//! (background) classical light.
//!
//! The crate is organized around the data flow of a ranging experiment:
//!
//! - [`model`] — frames, gate schedules, intensity images, hot-pixel policies,
//!   and the time-of-flight depth conversion.
//! - [`sim`] — Monte Carlo generator of gated SPAD frame stacks for scenes
//!   containing a photon-pair source, classical interference sources, and
//!   detector defects.
//! - [`corr`] — coincidence counting: joint probability distribution (JPD)
//!   estimation, the spatially-averaged correlation image over sum
//!   coordinates (direct integer and FFT paths), spatially-resolved
//!   anti-diagonal images, crosstalk correction, and peak/SNR statistics.
//! - [`ranging`] — per-gate profiles, erf falling-edge fits, dual-profile
//!   quantum/classical classification, subtraction imaging, and depth reports.
//! - [`adaptive`] — correlation-driven gate search that locates the quantum
//!   falling edge with a handful of probes instead of a full linear scan.
//! - [`io`] — frame-stack file format, scenario configs, presets, and
//!   CSV/PGM exports.

pub mod adaptive;
pub mod corr;
pub mod io;
pub mod model;
pub mod ranging;
pub mod scenes;
pub mod sim;

pub use model::{Frame, FrameStack, GateSchedule, GateWindow};
