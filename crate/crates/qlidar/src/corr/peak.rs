//! Correlation peak statistics: peak value in a central search window, SNR
//! against the background outside an exclusion window.

use super::gamma::SumImage;
use super::jpd::CorrError;

#[derive(Debug, Clone, PartialEq)]
pub struct PeakStats {
    pub peak_value: f64,
    /// Sum coordinate of the peak.
    pub peak_location: (usize, usize),
    pub background_mean: f64,
    pub background_std: f64,
    /// peak_value / background_std; +inf when the background is flat.
    pub snr: f64,
}

/// Peak over the central (2*search+1)^2 window; background statistics over
/// everything outside the central (2*exclusion+1)^2 window.
pub fn peak_stats(
    sum_image: &SumImage,
    exclusion: usize,
    search: usize,
) -> Result<PeakStats, CorrError> {
    if exclusion < search {
        return Err(CorrError::ExclusionSmallerThanSearch { exclusion, search });
    }
    let (w, h) = (sum_image.width(), sum_image.height());
    let (cx, cy) = (w / 2, h / 2);
    if cx < exclusion || cy < exclusion || cx + exclusion >= w || cy + exclusion >= h {
        return Err(CorrError::ImageTooSmall { w, h, exclusion });
    }

    let mut peak_value = f64::NEG_INFINITY;
    let mut peak_location = (cx, cy);
    for sy in cy - search..=cy + search {
        for sx in cx - search..=cx + search {
            let v = sum_image.get(sx, sy);
            if v > peak_value {
                peak_value = v;
                peak_location = (sx, sy);
            }
        }
    }

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for sy in 0..h {
        for sx in 0..w {
            let in_exclusion = sx.abs_diff(cx) <= exclusion && sy.abs_diff(cy) <= exclusion;
            if in_exclusion {
                continue;
            }
            let v = sum_image.get(sx, sy);
            sum += v;
            sum_sq += v * v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(CorrError::ImageTooSmall { w, h, exclusion });
    }
    let background_mean = sum / count as f64;
    let variance = (sum_sq / count as f64 - background_mean * background_mean).max(0.0);
    let background_std = variance.sqrt();
    let snr = if background_std == 0.0 { f64::INFINITY } else { peak_value / background_std };

    Ok(PeakStats { peak_value, peak_location, background_mean, background_std, snr })
}
