//! Intensity images and detector-defect (hot pixel) policies.

use super::frame::{FrameStack, ModelError};

/// Per-pixel integer photon-count sums. Exact for N*255 <= 2^31.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    data: Vec<u32>,
}

impl IntensityImage {
    pub fn new(width: usize, height: usize, data: Vec<u32>) -> Result<Self, ModelError> {
        if data.len() != width * height {
            return Err(ModelError::BadDataLength { width, height, got: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[y * self.width + x]
    }
}

/// Pixels flagged as hot from a dark acquisition, plus the threshold used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HotPixelMask {
    width: usize,
    height: usize,
    flagged: Vec<bool>,
    pub threshold: u32,
}

impl HotPixelMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, flagged: vec![false; width * height], threshold: 0 }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn is_hot(&self, x: usize, y: usize) -> bool {
        self.flagged[y * self.width + x]
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    /// Flagged coordinates in scan order.
    pub fn coords(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.flagged[y * self.width + x] {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn check_grid(&self, width: usize, height: usize) -> Result<(), ModelError> {
        if self.width != width || self.height != height {
            return Err(ModelError::MaskGridMismatch {
                mask_w: self.width,
                mask_h: self.height,
                frame_w: width,
                frame_h: height,
            });
        }
        Ok(())
    }
}

/// Pixel-wise sum of all frames in the stack.
pub fn sum_intensity(stack: &FrameStack) -> Result<IntensityImage, ModelError> {
    if stack.is_empty() {
        return Err(ModelError::EmptyStack);
    }
    let (w, h) = (stack.width(), stack.height());
    let mut data = vec![0u32; w * h];
    for frame in stack.frames() {
        for (acc, &v) in data.iter_mut().zip(frame.data()) {
            *acc += u32::from(v);
        }
    }
    IntensityImage::new(w, h, data)
}

/// Flag every pixel whose summed dark count exceeds `threshold`.
pub fn build_hot_pixel_mask(dark_stack: &FrameStack, threshold: u32) -> Result<HotPixelMask, ModelError> {
    let sums = sum_intensity(dark_stack)?;
    let flagged = sums.data().iter().map(|&s| s > threshold).collect();
    Ok(HotPixelMask {
        width: sums.width(),
        height: sums.height(),
        flagged,
        threshold,
    })
}

/// Force flagged pixels to zero in every frame; all other pixels untouched.
pub fn zero_hot_pixels(stack: &FrameStack, mask: &HotPixelMask) -> Result<FrameStack, ModelError> {
    mask.check_grid(stack.width(), stack.height())?;
    let mut out = stack.clone();
    let hot: Vec<usize> = mask
        .flagged
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i))
        .collect();
    for frame in out.frames_mut() {
        let data = frame.data_mut();
        for &i in &hot {
            data[i] = 0;
        }
    }
    Ok(out)
}

/// Replace each flagged pixel by the rounded mean of its non-flagged
/// 8-neighbors. A flagged pixel with no non-flagged neighbor becomes 0.
/// Display-only; never feeds correlation math.
pub fn smooth_hot_pixels(image: &IntensityImage, mask: &HotPixelMask) -> Result<IntensityImage, ModelError> {
    mask.check_grid(image.width(), image.height())?;
    let (w, h) = (image.width(), image.height());
    let mut data = image.data().to_vec();
    for (x, y) in mask.coords() {
        let mut sum = 0u64;
        let mut count = 0u64;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                if mask.is_hot(nx as usize, ny as usize) {
                    continue;
                }
                sum += u64::from(image.get(nx as usize, ny as usize));
                count += 1;
            }
        }
        data[y * w + x] = if count == 0 {
            0
        } else {
            ((sum as f64 / count as f64).round()) as u32
        };
    }
    IntensityImage::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::frame::{Frame, GateWindow};

    fn gate() -> GateWindow {
        GateWindow::new(0, 100, 0.0).unwrap()
    }

    fn stack_from(frames: Vec<Frame>) -> FrameStack {
        FrameStack::new(frames, gate(), 0).unwrap()
    }

    #[test]
    fn sum_of_zero_frames_is_zero() {
        let stack = stack_from(vec![Frame::zeros(4, 3, 8); 5]);
        let sums = sum_intensity(&stack).unwrap();
        assert!(sums.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn sum_is_linear_in_identical_frames() {
        let frame = Frame::new(2, 2, 8, vec![1, 2, 3, 4]).unwrap();
        let stack = stack_from(vec![frame; 7]);
        let sums = sum_intensity(&stack).unwrap();
        assert_eq!(sums.data(), &[7, 14, 21, 28]);
    }

    #[test]
    fn sum_matches_per_pixel_loop_oracle() {
        // Fixed pseudo-random 4x4 stack checked against direct summation.
        let mut state = 0x1234_5678u32;
        let mut next = || {
            state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
            (state >> 24) as u8
        };
        let frames: Vec<Frame> = (0..6)
            .map(|_| Frame::new(4, 4, 8, (0..16).map(|_| next()).collect()).unwrap())
            .collect();
        let stack = stack_from(frames.clone());
        let sums = sum_intensity(&stack).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let expect: u32 = frames.iter().map(|f| u32::from(f.get(x, y))).sum();
                assert_eq!(sums.get(x, y), expect);
            }
        }
    }

    #[test]
    fn hot_mask_threshold_is_strict() {
        // One pixel totals 201, the rest 0; threshold 200 flags exactly it.
        let mut data = vec![0u8; 9];
        data[4] = 201;
        let frame = Frame::new(3, 3, 8, data).unwrap();
        let stack = stack_from(vec![frame, Frame::zeros(3, 3, 8)]);
        let mask = build_hot_pixel_mask(&stack, 200).unwrap();
        assert_eq!(mask.coords(), vec![(1, 1)]);

        // A total of exactly 200 stays unflagged.
        let mut data = vec![0u8; 9];
        data[4] = 200;
        let frame = Frame::new(3, 3, 8, data).unwrap();
        let stack = stack_from(vec![frame, Frame::zeros(3, 3, 8)]);
        let mask = build_hot_pixel_mask(&stack, 200).unwrap();
        assert_eq!(mask.flagged_count(), 0);
    }

    #[test]
    fn all_zero_dark_stack_gives_empty_mask() {
        let stack = stack_from(vec![Frame::zeros(4, 4, 8); 3]);
        let mask = build_hot_pixel_mask(&stack, 200).unwrap();
        assert_eq!(mask.flagged_count(), 0);
    }

    #[test]
    fn zero_hot_pixels_empty_and_full_mask() {
        let frame = Frame::new(2, 2, 8, vec![5, 6, 7, 8]).unwrap();
        let stack = stack_from(vec![frame; 3]);
        let empty = HotPixelMask::empty(2, 2);
        assert_eq!(zero_hot_pixels(&stack, &empty).unwrap(), stack);

        let full = HotPixelMask {
            width: 2,
            height: 2,
            flagged: vec![true; 4],
            threshold: 0,
        };
        let zeroed = zero_hot_pixels(&stack, &full).unwrap();
        assert!(zeroed.frames().iter().all(|f| f.data().iter().all(|&v| v == 0)));
    }

    #[test]
    fn zero_hot_pixels_touches_only_flagged_column() {
        let frame = Frame::new(2, 2, 8, vec![5, 6, 7, 8]).unwrap();
        let stack = stack_from(vec![frame; 3]);
        let mut mask = HotPixelMask::empty(2, 2);
        mask.flagged[2] = true; // pixel (0, 1)
        let zeroed = zero_hot_pixels(&stack, &mask).unwrap();
        for f in zeroed.frames() {
            assert_eq!(f.data(), &[5, 6, 0, 8]);
        }
    }

    #[test]
    fn zero_hot_pixels_is_idempotent() {
        let frame = Frame::new(3, 1, 8, vec![9, 9, 9]).unwrap();
        let stack = stack_from(vec![frame; 2]);
        let mut mask = HotPixelMask::empty(3, 1);
        mask.flagged[1] = true;
        let once = zero_hot_pixels(&stack, &mask).unwrap();
        let twice = zero_hot_pixels(&once, &mask).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn smoothing_replaces_flagged_pixel_with_neighbor_mean() {
        // Neighbors {0,0,0,0,8,8,8,8} -> mean 4.
        let data = vec![0, 0, 0, 0, 99, 8, 8, 8, 8];
        let image = IntensityImage::new(3, 3, data).unwrap();
        let mut mask = HotPixelMask::empty(3, 3);
        mask.flagged[4] = true;
        let smoothed = smooth_hot_pixels(&image, &mask).unwrap();
        assert_eq!(smoothed.get(1, 1), 4);
    }

    #[test]
    fn smoothing_constant_field_and_identity() {
        let image = IntensityImage::new(3, 3, vec![7; 9]).unwrap();
        let empty = HotPixelMask::empty(3, 3);
        assert_eq!(smooth_hot_pixels(&image, &empty).unwrap(), image);

        let mut mask = HotPixelMask::empty(3, 3);
        mask.flagged[4] = true;
        let smoothed = smooth_hot_pixels(&image, &mask).unwrap();
        assert_eq!(smoothed.get(1, 1), 7);
    }

    #[test]
    fn smoothing_isolated_all_flagged_neighborhood_gives_zero() {
        let image = IntensityImage::new(3, 3, vec![50; 9]).unwrap();
        let mask = HotPixelMask {
            width: 3,
            height: 3,
            flagged: vec![true; 9],
            threshold: 0,
        };
        let smoothed = smooth_hot_pixels(&image, &mask).unwrap();
        assert_eq!(smoothed.get(1, 1), 0);
    }

    #[test]
    fn mask_grid_mismatch_is_rejected() {
        let stack = stack_from(vec![Frame::zeros(4, 4, 8); 2]);
        let mask = HotPixelMask::empty(3, 3);
        assert!(zero_hot_pixels(&stack, &mask).is_err());
    }
}
