//! Minimal planned 2-D FFT on zero-padded row-major buffers.
//!
//! Forward transforms leave the spectrum in transposed (column-major)
//! layout; pointwise products of two such spectra are still pointwise, and
//! the inverse transform undoes the layout, so callers never see it.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Planned forward/inverse transforms for one padded size.
///
/// Plans are shareable across threads; each caller owns a [`Fft2dWorkspace`].
pub struct Fft2d {
    pub width: usize,
    pub height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

pub struct Fft2dWorkspace {
    transposed: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft(width, FftDirection::Forward),
            col_fwd: planner.plan_fft(height, FftDirection::Forward),
            row_inv: planner.plan_fft(width, FftDirection::Inverse),
            col_inv: planner.plan_fft(height, FftDirection::Inverse),
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn make_workspace(&self) -> Fft2dWorkspace {
        let scratch_len = self
            .row_fwd
            .get_inplace_scratch_len()
            .max(self.col_fwd.get_inplace_scratch_len())
            .max(self.row_inv.get_inplace_scratch_len())
            .max(self.col_inv.get_inplace_scratch_len());
        Fft2dWorkspace {
            transposed: vec![Complex::default(); self.len()],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    /// Forward transform; on return `buf` holds the spectrum transposed
    /// (column-major).
    pub fn forward(&self, buf: &mut [Complex<f64>], ws: &mut Fft2dWorkspace) {
        debug_assert_eq!(buf.len(), self.len());
        for line in buf.chunks_exact_mut(self.width) {
            self.row_fwd.process_with_scratch(line, &mut ws.scratch);
        }
        transpose_into(self.width, self.height, buf, &mut ws.transposed);
        for line in ws.transposed.chunks_exact_mut(self.height) {
            self.col_fwd.process_with_scratch(line, &mut ws.scratch);
        }
        buf.copy_from_slice(&ws.transposed);
    }

    /// Inverse of [`forward`]: takes a transposed spectrum, returns the
    /// unnormalized spatial buffer in row-major layout; divide by `len()`.
    pub fn inverse(&self, buf: &mut [Complex<f64>], ws: &mut Fft2dWorkspace) {
        debug_assert_eq!(buf.len(), self.len());
        for line in buf.chunks_exact_mut(self.height) {
            self.col_inv.process_with_scratch(line, &mut ws.scratch);
        }
        transpose_into(self.height, self.width, buf, &mut ws.transposed);
        for line in ws.transposed.chunks_exact_mut(self.width) {
            self.row_inv.process_with_scratch(line, &mut ws.scratch);
        }
        buf.copy_from_slice(&ws.transposed);
    }
}

fn transpose_into(width: usize, height: usize, src: &[Complex<f64>], dst: &mut [Complex<f64>]) {
    const BLOCK: usize = 32;
    for by in (0..height).step_by(BLOCK) {
        for bx in (0..width).step_by(BLOCK) {
            for y in by..(by + BLOCK).min(height) {
                for x in bx..(bx + BLOCK).min(width) {
                    dst[x * height + y] = src[y * width + x];
                }
            }
        }
    }
}
