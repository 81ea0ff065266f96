//! Spatially-averaged and spatially-resolved correlation images.
//!
//! Both are projections of the frame-to-frame coincidence estimator
//! Gamma(i, j) = 1/(N-1) * sum_{l=2..N} [I_l(i) I_l(j) - I_l(i) I_{l-1}(j)]
//! and are computed without materializing the full JPD:
//!
//! - the sum-coordinate image is a sum of full 2-D convolutions,
//!   Gamma_+(s) = 1/(N-1) * sum_l [(I_l * I_l)(s) - (I_l * I_{l-1})(s)],
//!   counting ordered pixel pairs (both orderings, and i = j);
//! - the anti-diagonal image pairs each pixel r with its partner s0 - r.
//!
//! The direct path accumulates exact integer numerators, so parallel
//! reduction order cannot change the result. The FFT path accumulates
//! per-frame products in the frequency domain in fixed chunk order and runs a
//! single inverse transform.

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::model::FrameStack;

use super::fft2d::{next_pow2, Fft2d};
use super::jpd::CorrError;

/// Correlation image over sum coordinates s = r1 + r2, size
/// (2W-1) x (2H-1). Direct-path results carry exact integer numerators.
#[derive(Debug, Clone, PartialEq)]
pub struct SumImage {
    width: usize,
    height: usize,
    frame_width: usize,
    frame_height: usize,
    values: Vec<f64>,
    numerators: Option<Vec<i64>>,
    denom: u32,
}

impl SumImage {
    pub(crate) fn from_numerators(
        frame_width: usize,
        frame_height: usize,
        numerators: Vec<i64>,
        denom: u32,
    ) -> Self {
        let values = numerators.iter().map(|&n| n as f64 / f64::from(denom)).collect();
        Self {
            width: 2 * frame_width - 1,
            height: 2 * frame_height - 1,
            frame_width,
            frame_height,
            values,
            numerators: Some(numerators),
            denom,
        }
    }

    pub(crate) fn from_values(
        frame_width: usize,
        frame_height: usize,
        values: Vec<f64>,
        denom: u32,
    ) -> Self {
        Self {
            width: 2 * frame_width - 1,
            height: 2 * frame_height - 1,
            frame_width,
            frame_height,
            values,
            numerators: None,
            denom,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_width(&self) -> usize {
        self.frame_width
    }

    pub fn frame_height(&self) -> usize {
        self.frame_height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact integer numerators over the common denominator N-1; present only
    /// on the direct path.
    pub fn numerators(&self) -> Option<&[i64]> {
        self.numerators.as_deref()
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    #[inline]
    pub fn get(&self, sx: usize, sy: usize) -> f64 {
        self.values[sy * self.width + sx]
    }

    /// Center of the sum plane, (W-1, H-1).
    pub fn center(&self) -> (usize, usize) {
        (self.frame_width - 1, self.frame_height - 1)
    }

    pub(crate) fn subtract_numerators(&mut self, correction: &[i64]) {
        debug_assert_eq!(correction.len(), self.values.len());
        match &mut self.numerators {
            Some(nums) => {
                let d = f64::from(self.denom);
                for ((n, v), &c) in nums.iter_mut().zip(self.values.iter_mut()).zip(correction) {
                    *n -= c;
                    *v = *n as f64 / d;
                }
            }
            None => {
                let d = f64::from(self.denom);
                for (v, &c) in self.values.iter_mut().zip(correction) {
                    *v -= c as f64 / d;
                }
            }
        }
    }
}

/// Spatially-resolved correlation image: pixel r paired with s0 - r.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiDiagImage {
    width: usize,
    height: usize,
    pub center: (i64, i64),
    values: Vec<f64>,
    numerators: Option<Vec<i64>>,
    denom: u32,
}

impl AntiDiagImage {
    pub(crate) fn from_numerators(
        width: usize,
        height: usize,
        center: (i64, i64),
        numerators: Vec<i64>,
        denom: u32,
    ) -> Self {
        let values = numerators.iter().map(|&n| n as f64 / f64::from(denom)).collect();
        Self { width, height, center, values, numerators: Some(numerators), denom }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn numerators(&self) -> Option<&[i64]> {
        self.numerators.as_deref()
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Computation path for the sum-coordinate image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact integer spatial convolution; the oracle path.
    Direct,
    /// Zero-padded FFT accumulation; mandatory above oracle scale.
    Fft,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Method::Direct),
            "fft" => Ok(Method::Fft),
            other => Err(format!("unknown method `{other}` (expected `direct` or `fft`)")),
        }
    }
}

/// Sparse frame representation used by the direct path.
fn sparse(frame: &crate::model::Frame) -> Vec<(u32, u32, i64)> {
    frame
        .nonzero()
        .into_iter()
        .map(|(x, y, v)| (u32::from(x), u32::from(y), i64::from(v)))
        .collect()
}

const FRAME_CHUNK: usize = 32;

fn gamma_plus_direct(stack: &FrameStack) -> SumImage {
    let (w, h) = (stack.width(), stack.height());
    let sw = 2 * w - 1;
    let sh = 2 * h - 1;
    let frames = stack.frames();
    let n = frames.len();

    // Term l needs frames l and l-1; chunks overlap by one frame.
    let chunks: Vec<(usize, usize)> = (1..n)
        .step_by(FRAME_CHUNK)
        .map(|a| (a, (a + FRAME_CHUNK).min(n)))
        .collect();

    let numerators = chunks
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = vec![0i64; sw * sh];
            let mut prev = sparse(&frames[a - 1]);
            for frame in &frames[a..b] {
                let cur = sparse(frame);
                for &(xi, yi, vi) in &cur {
                    for &(xj, yj, vj) in &cur {
                        acc[((yi + yj) as usize) * sw + (xi + xj) as usize] += vi * vj;
                    }
                    for &(xj, yj, vj) in &prev {
                        acc[((yi + yj) as usize) * sw + (xi + xj) as usize] -= vi * vj;
                    }
                }
                prev = cur;
            }
            acc
        })
        .reduce(
            || vec![0i64; sw * sh],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    SumImage::from_numerators(w, h, numerators, (n - 1) as u32)
}

fn embed(frame: &crate::model::Frame, pw: usize, buf: &mut [Complex<f64>]) {
    buf.fill(Complex::default());
    let w = frame.width();
    for (y, row) in frame.data().chunks_exact(w).enumerate() {
        let dst = &mut buf[y * pw..y * pw + w];
        for (d, &v) in dst.iter_mut().zip(row) {
            *d = Complex::new(f64::from(v), 0.0);
        }
    }
}

fn gamma_plus_fft(stack: &FrameStack) -> SumImage {
    let (w, h) = (stack.width(), stack.height());
    let (sw, sh) = (2 * w - 1, 2 * h - 1);
    let (pw, ph) = (next_pow2(sw), next_pow2(sh));
    let fft = Fft2d::new(pw, ph);
    let frames = stack.frames();
    let n = frames.len();

    let chunks: Vec<(usize, usize)> = (1..n)
        .step_by(FRAME_CHUNK)
        .map(|a| (a, (a + FRAME_CHUNK).min(n)))
        .collect();

    // Accumulate F_l .* (F_l - F_{l-1}) per chunk, then sum partials in chunk
    // order so the float result does not depend on thread scheduling.
    let partials: Vec<Vec<Complex<f64>>> = chunks
        .into_par_iter()
        .map(|(a, b)| {
            let mut ws = fft.make_workspace();
            let mut prev = vec![Complex::default(); fft.len()];
            let mut cur = vec![Complex::default(); fft.len()];
            let mut acc = vec![Complex::default(); fft.len()];
            embed(&frames[a - 1], pw, &mut prev);
            fft.forward(&mut prev, &mut ws);
            for frame in &frames[a..b] {
                embed(frame, pw, &mut cur);
                fft.forward(&mut cur, &mut ws);
                for ((acc, &c), &p) in acc.iter_mut().zip(cur.iter()).zip(prev.iter()) {
                    *acc += c * (c - p);
                }
                std::mem::swap(&mut prev, &mut cur);
            }
            acc
        })
        .collect();

    let mut total = vec![Complex::default(); fft.len()];
    for partial in partials {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += p;
        }
    }

    let mut ws = fft.make_workspace();
    fft.inverse(&mut total, &mut ws);

    let scale = 1.0 / (fft.len() as f64 * (n - 1) as f64);
    let mut values = vec![0.0f64; sw * sh];
    for sy in 0..sh {
        for sx in 0..sw {
            values[sy * sw + sx] = total[sy * pw + sx].re * scale;
        }
    }
    SumImage::from_values(w, h, values, (n - 1) as u32)
}

/// Spatially-averaged correlation image over sum coordinates r1 + r2.
pub fn gamma_plus(stack: &FrameStack, method: Method) -> Result<SumImage, CorrError> {
    if stack.len() < 2 {
        return Err(CorrError::TooFewFrames(stack.len()));
    }
    Ok(match method {
        Method::Direct => gamma_plus_direct(stack),
        Method::Fft => gamma_plus_fft(stack),
    })
}

/// Spatially-resolved correlation image: coincidences between each pixel r
/// and its symmetric partner s0 - r. Off-grid partners yield 0.
pub fn gamma_antidiag(stack: &FrameStack, center: (i64, i64)) -> Result<AntiDiagImage, CorrError> {
    let n = stack.len();
    if n < 2 {
        return Err(CorrError::TooFewFrames(n));
    }
    let (w, h) = (stack.width(), stack.height());
    let frames = stack.frames();

    // Partner index for each pixel, or usize::MAX when off grid.
    let partner: Vec<usize> = (0..w * h)
        .map(|idx| {
            let (x, y) = ((idx % w) as i64, (idx / w) as i64);
            let (px, py) = (center.0 - x, center.1 - y);
            if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
                usize::MAX
            } else {
                py as usize * w + px as usize
            }
        })
        .collect();

    let chunks: Vec<(usize, usize)> = (1..n)
        .step_by(FRAME_CHUNK)
        .map(|a| (a, (a + FRAME_CHUNK).min(n)))
        .collect();

    let numerators = chunks
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = vec![0i64; w * h];
            for l in a..b {
                let cur = frames[l].data();
                let prev = frames[l - 1].data();
                for (idx, acc_v) in acc.iter_mut().enumerate() {
                    let vi = i64::from(cur[idx]);
                    if vi == 0 {
                        continue;
                    }
                    let p = partner[idx];
                    if p == usize::MAX {
                        continue;
                    }
                    *acc_v += vi * (i64::from(cur[p]) - i64::from(prev[p]));
                }
            }
            acc
        })
        .reduce(
            || vec![0i64; w * h],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    Ok(AntiDiagImage::from_numerators(w, h, center, numerators, (n - 1) as u32))
}

/// Largest relative deviation between two sum images, normalized by the peak
/// magnitude of `reference`.
pub fn max_relative_deviation(reference: &SumImage, other: &SumImage) -> f64 {
    let norm = reference
        .values()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    reference
        .values()
        .iter()
        .zip(other.values())
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
        / norm
}
