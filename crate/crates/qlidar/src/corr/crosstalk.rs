//! Crosstalk correction: remove the coincidence contribution of direct
//! neighbor pixel pairs from a sum-coordinate correlation image.

use rayon::prelude::*;

use crate::model::FrameStack;

use super::gamma::SumImage;
use super::jpd::CorrError;

/// Pixel-pair offsets whose correlation entries are treated as crosstalk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighborhood {
    /// Include the 4 diagonal neighbors in addition to the direct 4.
    pub eight_connected: bool,
    /// Also remove self pairs (i = j), i.e. the shot-noise autocorrelation
    /// sitting on even sum coordinates.
    pub include_self: bool,
}

impl Default for Neighborhood {
    fn default() -> Self {
        Self { eight_connected: false, include_self: false }
    }
}

impl Neighborhood {
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let mut out = vec![(1, 0), (-1, 0), (0, 1), (0, -1)];
        if self.eight_connected {
            out.extend([(1, 1), (1, -1), (-1, 1), (-1, -1)]);
        }
        if self.include_self {
            out.push((0, 0));
        }
        out
    }
}

/// Subtract from `sum_image` the exact contribution of all ordered pixel
/// pairs (r, r + delta) for each offset delta in the neighborhood. Offsets
/// come in +/- pairs, so both orderings of each neighbor pair are covered.
pub fn remove_crosstalk(
    sum_image: &SumImage,
    stack: &FrameStack,
    neighborhood: Neighborhood,
) -> Result<SumImage, CorrError> {
    let (w, h) = (stack.width(), stack.height());
    if sum_image.frame_width() != w || sum_image.frame_height() != h {
        return Err(CorrError::DimensionMismatch);
    }
    let n = stack.len();
    if n < 2 {
        return Err(CorrError::TooFewFrames(n));
    }

    let offsets = neighborhood.offsets();
    let (sw, sh) = (sum_image.width(), sum_image.height());
    let frames = stack.frames();

    let chunks: Vec<(usize, usize)> =
        (1..n).step_by(32).map(|a| (a, (a + 32).min(n))).collect();

    let correction = chunks
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = vec![0i64; sw * sh];
            for l in a..b {
                let cur = frames[l].data();
                let prev = frames[l - 1].data();
                for (idx, &raw) in cur.iter().enumerate() {
                    let vi = i64::from(raw);
                    if vi == 0 {
                        continue;
                    }
                    let (x, y) = ((idx % w) as i64, (idx / w) as i64);
                    for &(dx, dy) in &offsets {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let j = ny as usize * w + nx as usize;
                        let term = vi * (i64::from(cur[j]) - i64::from(prev[j]));
                        if term != 0 {
                            let s = ((y + ny) as usize) * sw + (x + nx) as usize;
                            acc[s] += term;
                        }
                    }
                }
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

    let mut out = sum_image.clone();
    out.subtract_numerators(&correction);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::gamma::{gamma_plus, Method};
    use crate::corr::jpd::{jpd_bruteforce, Region};
    use crate::model::{Frame, FrameStack, GateWindow};

    fn stack_from(frames: Vec<Frame>) -> FrameStack {
        FrameStack::new(frames, GateWindow::new(0, 100, 0.0).unwrap(), 0).unwrap()
    }

    #[test]
    fn no_adjacent_photons_means_identity() {
        // Photons only at (0,0) and (3,3): never adjacent.
        let mut data = vec![0u8; 16];
        data[0] = 1;
        data[15] = 1;
        let stack = stack_from(vec![Frame::zeros(4, 4, 8), Frame::new(4, 4, 8, data).unwrap()]);
        let g = gamma_plus(&stack, Method::Direct).unwrap();
        let corrected = remove_crosstalk(&g, &stack, Neighborhood::default()).unwrap();
        assert_eq!(g.values(), corrected.values());
    }

    #[test]
    fn adjacent_pair_is_removed_at_its_sum_coordinate() {
        // Only photons at r=(1,1) and r+delta=(2,1).
        let mut data = vec![0u8; 16];
        data[1 * 4 + 1] = 1;
        data[1 * 4 + 2] = 1;
        let stack = stack_from(vec![Frame::zeros(4, 4, 8), Frame::new(4, 4, 8, data).unwrap()]);
        let g = gamma_plus(&stack, Method::Direct).unwrap();
        // s = 2r + delta = (3, 2) holds both orderings before correction.
        assert_eq!(g.get(3, 2), 2.0);
        let corrected = remove_crosstalk(&g, &stack, Neighborhood::default()).unwrap();
        assert_eq!(corrected.get(3, 2), 0.0);
        // Self pairs at (2,2) and (4,2) survive the default neighborhood.
        assert_eq!(corrected.get(2, 2), 1.0);
        assert_eq!(corrected.get(4, 2), 1.0);
    }

    #[test]
    fn matches_zeroed_jpd_oracle() {
        let mut state = 11u64;
        let mut coin = |p: u64| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1);
            (state >> 33) % 100 < p
        };
        let (w, h, n) = (16usize, 16usize, 20usize);
        let frames: Vec<Frame> = (0..n)
            .map(|_| Frame::new(w, h, 1, (0..w * h).map(|_| u8::from(coin(15))).collect()).unwrap())
            .collect();
        let stack = stack_from(frames);

        for nb in [
            Neighborhood::default(),
            Neighborhood { eight_connected: true, include_self: false },
            Neighborhood { eight_connected: false, include_self: true },
        ] {
            let g = gamma_plus(&stack, Method::Direct).unwrap();
            let corrected = remove_crosstalk(&g, &stack, nb).unwrap();

            let jpd = jpd_bruteforce(&stack, Region::full(w, h)).unwrap();
            let zeroed = jpd.zero_offsets(&nb.offsets());
            let oracle = zeroed.project_sum(w, h);

            assert_eq!(corrected.numerators().unwrap(), oracle.numerators().unwrap());
        }
    }
}
