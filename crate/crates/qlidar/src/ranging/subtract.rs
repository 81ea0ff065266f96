//! Subtraction imaging: isolate the return that vanishes at a falling edge by
//! differencing the intensity images a fixed number of gates before and after
//! the edge midpoint.

use crate::model::{smooth_hot_pixels, sum_intensity, HotPixelMask, IntensityImage, ModelError};
use crate::sim::ScanDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct SubtractionImage {
    pub image: IntensityImage,
    pub gate_before: usize,
    pub gate_after: usize,
    /// Set when t0 +/- offset fell outside the scanned range and the nearest
    /// valid gates were used instead.
    pub out_of_range: bool,
}

/// Signed pixel difference of two intensity images.
pub(crate) fn subtraction_signed(before: &IntensityImage, after: &IntensityImage) -> Vec<i64> {
    before
        .data()
        .iter()
        .zip(after.data())
        .map(|(&b, &a)| i64::from(b) - i64::from(a))
        .collect()
}

/// Intensity image at `t0 - offset` minus the one at `t0 + offset`, hot
/// pixels smoothed first, negatives clamped to zero.
pub fn edge_subtraction_image(
    dataset: &ScanDataset,
    mask: &HotPixelMask,
    t0_ps: f64,
    offset_steps: usize,
) -> Result<SubtractionImage, ModelError> {
    let schedule = &dataset.schedule;
    let center = (t0_ps - schedule.start0_ps as f64) / schedule.step_ps as f64;
    let max_index = (schedule.count - 1) as i64;
    let raw_before = center.round() as i64 - offset_steps as i64;
    let raw_after = center.round() as i64 + offset_steps as i64;
    let before = raw_before.clamp(0, max_index) as usize;
    let after = raw_after.clamp(0, max_index) as usize;
    let out_of_range = raw_before != before as i64 || raw_after != after as i64;

    let img_before = smooth_hot_pixels(&sum_intensity(&dataset.stacks[before])?, mask)?;
    let img_after = smooth_hot_pixels(&sum_intensity(&dataset.stacks[after])?, mask)?;

    let diff = subtraction_signed(&img_before, &img_after);
    let data: Vec<u32> = diff.iter().map(|&d| d.max(0) as u32).collect();
    Ok(SubtractionImage {
        image: IntensityImage::new(img_before.width(), img_before.height(), data)?,
        gate_before: before,
        gate_after: after,
        out_of_range,
    })
}
