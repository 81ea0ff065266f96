//! Domain types, time/depth conversions, frame arithmetic, and
//! detector-defect policies shared by every other module.
//!
//! All types are immutable values after construction; the operations here are
//! pure functions and safe for unrestricted concurrent use.

mod depth;
mod frame;
mod image;

pub use depth::{depth_mm, time_to_depth, DepthEntry, DepthReport, EdgeLabel, MM_PER_PS, SPEED_OF_LIGHT_M_PER_S};
pub use frame::{Frame, FrameStack, GateSchedule, GateWindow, ModelError};
pub use image::{build_hot_pixel_mask, smooth_hot_pixels, sum_intensity, zero_hot_pixels, HotPixelMask, IntensityImage};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_stack() -> impl Strategy<Value = FrameStack> {
        (2usize..6, 1usize..6, 1usize..6).prop_flat_map(|(n, w, h)| {
            proptest::collection::vec(proptest::collection::vec(0u8..=255, w * h), n).prop_map(
                move |frames| {
                    let frames = frames
                        .into_iter()
                        .map(|d| Frame::new(w, h, 8, d).unwrap())
                        .collect();
                    FrameStack::new(frames, GateWindow::new(0, 100, 0.0).unwrap(), 0).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn sum_intensity_commutes_with_frame_permutation(stack in arb_stack()) {
            let mut reversed_frames: Vec<Frame> = stack.frames().to_vec();
            reversed_frames.reverse();
            let reversed = FrameStack::new(reversed_frames, stack.gate, stack.seed).unwrap();
            prop_assert_eq!(sum_intensity(&stack).unwrap(), sum_intensity(&reversed).unwrap());
        }
    }
}
