//! Photon coincidence counting: JPD estimation, sum-coordinate correlation
//! images (direct integer and FFT paths), anti-diagonal images, crosstalk
//! correction, and peak statistics.

mod crosstalk;
mod fft2d;
mod gamma;
mod jpd;
mod peak;

pub use crosstalk::{remove_crosstalk, Neighborhood};
pub use gamma::{gamma_antidiag, gamma_plus, max_relative_deviation, AntiDiagImage, Method, SumImage};
pub use jpd::{jpd_bruteforce, CorrError, JpdMatrix, Region, MAX_REGION_PIXELS};
pub use peak::{peak_stats, PeakStats};
