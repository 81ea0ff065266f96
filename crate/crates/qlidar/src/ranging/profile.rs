//! Per-gate scalar traces: mean intensity, correlation peak, and peak SNR.

use rayon::prelude::*;

use crate::corr::{gamma_plus, peak_stats, remove_crosstalk, CorrError, Method, Neighborhood};
use crate::model::{sum_intensity, zero_hot_pixels, HotPixelMask, ModelError};
use crate::sim::ScanDataset;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corr(#[from] CorrError),
}

/// Correlation-pipeline knobs shared by the linear and adaptive scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub method: Method,
    pub crosstalk: Neighborhood,
    /// Background exclusion half-width for peak statistics.
    pub exclusion: usize,
    /// Peak search half-width (the 9x9 inset uses 4).
    pub search: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            method: Method::Fft,
            crosstalk: Neighborhood::default(),
            exclusion: 4,
            search: 4,
        }
    }
}

/// Per-gate traces over a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSeries {
    pub gate_times_ps: Vec<i64>,
    pub mean_intensity: Vec<f64>,
    pub corr_peak: Vec<f64>,
    pub corr_snr: Vec<f64>,
}

impl ProfileSeries {
    pub fn len(&self) -> usize {
        self.gate_times_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gate_times_ps.is_empty()
    }
}

/// Evaluate one stack: mean per-pixel per-frame intensity over non-hot
/// pixels, and correlation peak statistics after crosstalk removal.
pub fn stack_metrics(
    stack: &crate::model::FrameStack,
    mask: &HotPixelMask,
    opts: &ProfileOptions,
) -> Result<(f64, crate::corr::PeakStats), ProfileError> {
    let clean = zero_hot_pixels(stack, mask)?;
    let sums = sum_intensity(&clean)?;
    let n_pixels = (sums.width() * sums.height() - mask.flagged_count()).max(1);
    let total: u64 = sums.data().iter().map(|&v| u64::from(v)).sum();
    let mean_intensity = total as f64 / (n_pixels as f64 * stack.len() as f64);

    let gamma = gamma_plus(&clean, opts.method)?;
    let corrected = remove_crosstalk(&gamma, &clean, opts.crosstalk)?;
    let stats = peak_stats(&corrected, opts.exclusion, opts.search)?;
    Ok((mean_intensity, stats))
}

/// Extract the dual profiles of a scan dataset.
pub fn extract_profiles(
    dataset: &ScanDataset,
    mask: &HotPixelMask,
    opts: &ProfileOptions,
) -> Result<ProfileSeries, ProfileError> {
    let metrics: Vec<(f64, f64, f64)> = dataset
        .stacks
        .par_iter()
        .map(|stack| {
            stack_metrics(stack, mask, opts)
                .map(|(mean, stats)| (mean, stats.peak_value, stats.snr))
        })
        .collect::<Result<_, _>>()?;

    Ok(ProfileSeries {
        gate_times_ps: dataset.schedule.gate_times(),
        mean_intensity: metrics.iter().map(|m| m.0).collect(),
        corr_peak: metrics.iter().map(|m| m.1).collect(),
        corr_snr: metrics.iter().map(|m| m.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frame, FrameStack, GateSchedule, GateWindow, HotPixelMask};
    use crate::sim::ScanDataset;

    #[test]
    fn single_gate_dataset_gives_length_one_series() {
        let frames = vec![Frame::zeros(12, 12, 8); 3];
        let gate = GateWindow::new(0, 15_000, 0.0).unwrap();
        let stack = FrameStack::new(frames, gate, 0).unwrap();
        let schedule = GateSchedule::new(0, 18, 1, gate).unwrap();
        let dataset = ScanDataset { schedule, stacks: vec![stack] };
        let mask = HotPixelMask::empty(12, 12);
        let series = extract_profiles(&dataset, &mask, &ProfileOptions::default()).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series.mean_intensity[0], 0.0);
        assert_eq!(series.corr_peak[0], 0.0);
    }

    #[test]
    fn mean_intensity_ignores_hot_pixels() {
        let mut data = vec![1u8; 64];
        data[9] = 200; // hot pixel at (1, 1)
        let frames = vec![Frame::new(8, 8, 8, data).unwrap(); 10];
        let gate = GateWindow::new(0, 15_000, 0.0).unwrap();
        let stack = FrameStack::new(frames, gate, 0).unwrap();
        let schedule = GateSchedule::new(0, 18, 1, gate).unwrap();
        let dataset = ScanDataset { schedule, stacks: vec![stack] };

        let mut dark = vec![0u8; 64];
        dark[9] = 201;
        let dark_stack = FrameStack::new(
            vec![Frame::new(8, 8, 8, dark).unwrap(), Frame::zeros(8, 8, 8)],
            gate,
            0,
        )
        .unwrap();
        let mask = crate::model::build_hot_pixel_mask(&dark_stack, 200).unwrap();
        assert_eq!(mask.flagged_count(), 1);

        let series = extract_profiles(&dataset, &mask, &ProfileOptions::default()).unwrap();
        // 63 clean pixels of value 1 per frame.
        assert!((series.mean_intensity[0] - 1.0).abs() < 1e-12);
    }
}
