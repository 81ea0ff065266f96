//! Shared helpers for the integration suites.

use std::sync::{Mutex, MutexGuard, OnceLock};

/// Criteria involve wall-clock budgets and multi-core throughput; hold this
/// lock so test functions never run concurrently.
pub fn serial_lock() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|e| e.into_inner())
}

/// Otsu's threshold over a value buffer (256-bin histogram on [0, max]).
pub fn otsu_threshold(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return 0.0;
    }
    let mut hist = [0u32; 256];
    for &v in values {
        let bin = ((v.max(0.0) / max) * 255.0) as usize;
        hist[bin.min(255)] += 1;
    }
    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * f64::from(c)).sum();
    let (mut w0, mut sum0, mut best, mut best_bin) = (0.0f64, 0.0f64, -1.0f64, 0usize);
    for (bin, &count) in hist.iter().enumerate() {
        w0 += f64::from(count);
        if w0 == 0.0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0.0 {
            break;
        }
        sum0 += bin as f64 * f64::from(count);
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_bin = bin;
        }
    }
    best_bin as f64 / 255.0 * max
}

/// Intersection-over-union of two boolean masks.
pub fn iou(pred: &[bool], truth: &[bool]) -> f64 {
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        if p && t {
            intersection += 1;
        }
        if p || t {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// 3x3 box smoothing on a row-major image (shrinking window at borders).
pub fn smooth3x3(width: usize, height: usize, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut sum = 0.0;
            let mut count = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                        sum += values[ny as usize * width + nx as usize];
                        count += 1.0;
                    }
                }
            }
            out[y * width + x] = sum / count;
        }
    }
    out
}

/// Deterministic fraction in [0, 1) from a seed (splitmix64 finalizer).
pub fn unit_fraction(seed: u64) -> f64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

pub fn median_usize(values: &mut [usize]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 0 {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    } else {
        values[n / 2] as f64
    }
}
