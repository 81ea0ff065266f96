//! Brute-force joint probability distribution over all ordered pixel pairs of
//! a small region. Oracle-scale only; the production paths project the same
//! quantity without materializing it.

use thiserror::Error;

use crate::model::FrameStack;

use super::gamma::{AntiDiagImage, SumImage};

pub const MAX_REGION_PIXELS: usize = 32 * 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrError {
    #[error("correlation requires at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("region {w}x{h} exceeds the {max}-pixel brute-force limit")]
    RegionTooLarge { w: usize, h: usize, max: usize },
    #[error("region exceeds the frame grid")]
    RegionOutOfBounds,
    #[error("image {w}x{h} too small for exclusion half-width {exclusion}")]
    ImageTooSmall { w: usize, h: usize, exclusion: usize },
    #[error("exclusion half-width {exclusion} must be >= search half-width {search}")]
    ExclusionSmallerThanSearch { exclusion: usize, search: usize },
    #[error("sum image dimensions do not match the stack")]
    DimensionMismatch,
}

/// Rectangular pixel region, in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, width, height }
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Dense Gamma(i, j) over the ordered pixel pairs of one region, stored as an
/// exact integer numerator plus the common denominator N-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JpdMatrix {
    pub region: Region,
    /// Numerators, indexed `[i * pixels + j]` with i, j region-local
    /// scan-order pixel indices.
    pub numerators: Vec<i64>,
    /// Common denominator, N - 1.
    pub denom: u32,
}

impl JpdMatrix {
    #[inline]
    pub fn numerator(&self, i: usize, j: usize) -> i64 {
        self.numerators[i * self.region.pixels() + j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.numerator(i, j) as f64 / f64::from(self.denom)
    }

    fn coord(&self, idx: usize) -> (usize, usize) {
        (self.region.x0 + idx % self.region.width, self.region.y0 + idx / self.region.width)
    }

    /// Project onto sum coordinates: SumImage(s) = sum over ordered pairs with
    /// r_i + r_j = s. Exact integer accumulation, one division at the end.
    pub fn project_sum(&self, frame_width: usize, frame_height: usize) -> SumImage {
        let (sw, sh) = (2 * frame_width - 1, 2 * frame_height - 1);
        let mut num = vec![0i64; sw * sh];
        let n = self.region.pixels();
        for i in 0..n {
            let (xi, yi) = self.coord(i);
            for j in 0..n {
                let v = self.numerator(i, j);
                if v != 0 {
                    let (xj, yj) = self.coord(j);
                    num[(yi + yj) * sw + (xi + xj)] += v;
                }
            }
        }
        SumImage::from_numerators(frame_width, frame_height, num, self.denom)
    }

    /// Anti-diagonal slice: value at r comes from the ordered pair
    /// (r, s0 - r); off-grid partners give 0.
    pub fn anti_diagonal(
        &self,
        frame_width: usize,
        frame_height: usize,
        center: (i64, i64),
    ) -> AntiDiagImage {
        let n = self.region.pixels();
        let mut num = vec![0i64; frame_width * frame_height];
        for i in 0..n {
            let (xi, yi) = self.coord(i);
            let px = center.0 - xi as i64;
            let py = center.1 - yi as i64;
            if px < 0 || py < 0 {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            // Partner must lie inside the region for the JPD to know it.
            if px < self.region.x0
                || py < self.region.y0
                || px >= self.region.x0 + self.region.width
                || py >= self.region.y0 + self.region.height
            {
                continue;
            }
            let j = (py - self.region.y0) * self.region.width + (px - self.region.x0);
            num[yi * frame_width + xi] = self.numerator(i, j);
        }
        AntiDiagImage::from_numerators(frame_width, frame_height, center, num, self.denom)
    }

    /// Copy with the entries of all ordered pairs at the given pixel offsets
    /// zeroed (the crosstalk-correction oracle).
    pub fn zero_offsets(&self, offsets: &[(i64, i64)]) -> JpdMatrix {
        let mut out = self.clone();
        let n = self.region.pixels();
        for i in 0..n {
            let (xi, yi) = self.coord(i);
            for &(dx, dy) in offsets {
                let (xj, yj) = (xi as i64 + dx, yi as i64 + dy);
                if xj < self.region.x0 as i64
                    || yj < self.region.y0 as i64
                    || xj >= (self.region.x0 + self.region.width) as i64
                    || yj >= (self.region.y0 + self.region.height) as i64
                {
                    continue;
                }
                let j = (yj as usize - self.region.y0) * self.region.width
                    + (xj as usize - self.region.x0);
                out.numerators[i * n + j] = 0;
            }
        }
        out
    }
}

/// Brute-force JPD estimator:
/// Gamma(i, j) = 1/(N-1) * sum over frames l = 2..N of
/// I_l(i) I_l(j) - I_l(i) I_{l-1}(j).
pub fn jpd_bruteforce(stack: &FrameStack, region: Region) -> Result<JpdMatrix, CorrError> {
    let n_frames = stack.len();
    if n_frames < 2 {
        return Err(CorrError::TooFewFrames(n_frames));
    }
    if region.pixels() > MAX_REGION_PIXELS {
        return Err(CorrError::RegionTooLarge {
            w: region.width,
            h: region.height,
            max: MAX_REGION_PIXELS,
        });
    }
    if region.x0 + region.width > stack.width() || region.y0 + region.height > stack.height() {
        return Err(CorrError::RegionOutOfBounds);
    }

    let n = region.pixels();
    let mut numerators = vec![0i64; n * n];
    let frame_w = stack.width();
    let mut values = vec![0i64; n];
    let mut prev_values = vec![0i64; n];

    let extract = |frame: &crate::model::Frame, out: &mut [i64]| {
        for ry in 0..region.height {
            for rx in 0..region.width {
                out[ry * region.width + rx] =
                    i64::from(frame.data()[(region.y0 + ry) * frame_w + region.x0 + rx]);
            }
        }
    };

    extract(&stack.frames()[0], &mut prev_values);
    for l in 1..n_frames {
        extract(&stack.frames()[l], &mut values);
        for i in 0..n {
            let vi = values[i];
            if vi == 0 {
                continue;
            }
            let row = &mut numerators[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] += vi * (values[j] - prev_values[j]);
            }
        }
        std::mem::swap(&mut values, &mut prev_values);
    }

    Ok(JpdMatrix { region, numerators, denom: (n_frames - 1) as u32 })
}
