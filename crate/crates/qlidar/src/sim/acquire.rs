//! Stack and scan acquisition on top of the exposure Monte Carlo.
//!
//! Frames are generated from RNG streams derived by (seed, gate index, frame
//! index), never by execution order, so parallel acquisition is bit-identical
//! to sequential.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{Frame, FrameStack, GateSchedule, GateWindow};

use super::exposure::{ExposureCtx, ExposureState};
use super::scene::{DetectorSpec, Scene, SimError};

/// One frame stack per gate position of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanDataset {
    pub schedule: GateSchedule,
    pub stacks: Vec<FrameStack>,
}

impl ScanDataset {
    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }
}

/// Deterministic per-frame RNG stream.
pub fn frame_rng(seed: u64, gate_index: u64, frame_index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&gate_index.to_le_bytes());
    bytes[16..24].copy_from_slice(&frame_index.to_le_bytes());
    bytes[24..32].copy_from_slice(&0x514C_4653_u64.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn simulate_frame(ctx: &ExposureCtx, scene: &Scene, rng: &mut ChaCha8Rng) -> Frame {
    let mut state = ExposureState::new(scene.width, scene.height);
    state.reset_frame();
    let mut accum = vec![0u8; scene.width * scene.height];
    for _ in 0..ctx.bits_per_frame {
        ctx.run_exposure(rng, &mut state, &mut accum);
    }
    Frame::new(scene.width, scene.height, 8, accum).expect("accumulated 8-bit frame")
}

fn acquire_stack_at(
    scene: &Scene,
    detector: &DetectorSpec,
    gate: GateWindow,
    n_frames: usize,
    seed: u64,
    gate_index: u64,
) -> Result<FrameStack, SimError> {
    if n_frames < 2 {
        return Err(SimError::TooFewFrames(n_frames));
    }
    let ctx = ExposureCtx::new(scene, detector, gate)?;
    let frames: Vec<Frame> = (0..n_frames)
        .into_par_iter()
        .map(|frame_index| {
            let mut rng = frame_rng(seed, gate_index, frame_index as u64);
            simulate_frame(&ctx, scene, &mut rng)
        })
        .collect();
    Ok(FrameStack::new(frames, gate, seed).expect("homogeneous simulated frames"))
}

/// Acquire one stack of 8-bit frames at a fixed gate position.
pub fn acquire_stack(
    scene: &Scene,
    detector: &DetectorSpec,
    gate: GateWindow,
    n_frames: usize,
    seed: u64,
) -> Result<FrameStack, SimError> {
    acquire_stack_at(scene, detector, gate, n_frames, seed, 0)
}

/// Acquire an independent stack at every position of the schedule.
pub fn simulate_linear_scan(
    scene: &Scene,
    detector: &DetectorSpec,
    schedule: &GateSchedule,
    n_frames: usize,
    seed: u64,
) -> Result<ScanDataset, SimError> {
    let stacks = (0..schedule.count)
        .into_par_iter()
        .map(|i| {
            acquire_stack_at(scene, detector, schedule.gate_at(i), n_frames, seed, i as u64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScanDataset { schedule: schedule.clone(), stacks })
}

/// Acquire the stack for one schedule position only (the adaptive scan's
/// probe primitive); RNG streams match what a full linear scan would use.
pub fn acquire_stack_at_gate_index(
    scene: &Scene,
    detector: &DetectorSpec,
    schedule: &GateSchedule,
    gate_index: usize,
    n_frames: usize,
    seed: u64,
) -> Result<FrameStack, SimError> {
    acquire_stack_at(scene, detector, schedule.gate_at(gate_index), n_frames, seed, gate_index as u64)
}
