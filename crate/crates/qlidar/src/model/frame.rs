//! Frame and gate primitives shared by the simulator and the correlation
//! pipeline.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("frame data length {got} does not match {width}x{height}")]
    BadDataLength { width: usize, height: usize, got: usize },
    #[error("bit depth must be 1 or 8, got {0}")]
    BadBitDepth(u8),
    #[error("pixel value {value} exceeds maximum {max} for bit depth")]
    ValueOutOfRange { value: u8, max: u8 },
    #[error("frames in a stack must share dimensions and bit depth")]
    InhomogeneousStack,
    #[error("operation requires a non-empty stack")]
    EmptyStack,
    #[error("mask grid {mask_w}x{mask_h} does not match frame grid {frame_w}x{frame_h}")]
    MaskGridMismatch { mask_w: usize, mask_h: usize, frame_w: usize, frame_h: usize },
    #[error("time must be non-negative, got {0} ps")]
    NegativeTime(i64),
    #[error("gate width must be positive, got {0} ps")]
    BadGateWidth(i64),
    #[error("gate edge sigma must be non-negative, got {0} ps")]
    BadEdgeSigma(f64),
    #[error("schedule step must be positive, got {0} ps")]
    BadScheduleStep(i64),
    #[error("schedule must hold at least one gate position")]
    EmptySchedule,
}

/// A single photon-count frame, row-major.
///
/// 1-bit frames hold the raw per-exposure detector state; 8-bit frames are
/// accumulations of up to 255 of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    bit_depth: u8,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, bit_depth: u8, data: Vec<u8>) -> Result<Self, ModelError> {
        if bit_depth != 1 && bit_depth != 8 {
            return Err(ModelError::BadBitDepth(bit_depth));
        }
        if data.len() != width * height {
            return Err(ModelError::BadDataLength { width, height, got: data.len() });
        }
        let max = Self::max_value(bit_depth);
        if let Some(&value) = data.iter().find(|&&v| v > max) {
            return Err(ModelError::ValueOutOfRange { value, max });
        }
        Ok(Self { width, height, bit_depth, data })
    }

    pub fn zeros(width: usize, height: usize, bit_depth: u8) -> Self {
        Self { width, height, bit_depth, data: vec![0; width * height] }
    }

    fn max_value(bit_depth: u8) -> u8 {
        if bit_depth == 1 {
            1
        } else {
            u8::MAX
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Nonzero pixels as (x, y, count) triples, scan order.
    pub fn nonzero(&self) -> Vec<(u16, u16, u8)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            for (x, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.push((x as u16, y as u16, v));
                }
            }
        }
        out
    }
}

/// Timing window of the detector gate. Start and width live on the integer
/// picosecond grid; the edge softness is a model parameter and may be
/// fractional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateWindow {
    pub start_ps: i64,
    pub width_ps: i64,
    pub edge_sigma_ps: f64,
}

impl GateWindow {
    pub fn new(start_ps: i64, width_ps: i64, edge_sigma_ps: f64) -> Result<Self, ModelError> {
        if width_ps <= 0 {
            return Err(ModelError::BadGateWidth(width_ps));
        }
        if !(edge_sigma_ps >= 0.0) {
            return Err(ModelError::BadEdgeSigma(edge_sigma_ps));
        }
        Ok(Self { start_ps, width_ps, edge_sigma_ps })
    }
}

/// The set of gate positions scanned during ranging.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    pub start0_ps: i64,
    pub step_ps: i64,
    pub count: usize,
    /// Template window; its start is replaced per position.
    pub window: GateWindow,
}

impl GateSchedule {
    pub fn new(start0_ps: i64, step_ps: i64, count: usize, window: GateWindow) -> Result<Self, ModelError> {
        if step_ps <= 0 {
            return Err(ModelError::BadScheduleStep(step_ps));
        }
        if count == 0 {
            return Err(ModelError::EmptySchedule);
        }
        Ok(Self { start0_ps, step_ps, count, window })
    }

    pub fn gate_at(&self, index: usize) -> GateWindow {
        GateWindow {
            start_ps: self.start0_ps + self.step_ps * index as i64,
            width_ps: self.window.width_ps,
            edge_sigma_ps: self.window.edge_sigma_ps,
        }
    }

    pub fn gate_times(&self) -> Vec<i64> {
        (0..self.count).map(|i| self.start0_ps + self.step_ps * i as i64).collect()
    }
}

/// Ordered frames acquired at one gate position.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    frames: Vec<Frame>,
    pub gate: GateWindow,
    pub seed: u64,
}

impl FrameStack {
    pub fn new(frames: Vec<Frame>, gate: GateWindow, seed: u64) -> Result<Self, ModelError> {
        let first = frames.first().ok_or(ModelError::EmptyStack)?;
        let (w, h, b) = (first.width(), first.height(), first.bit_depth());
        if frames.iter().any(|f| f.width() != w || f.height() != h || f.bit_depth() != b) {
            return Err(ModelError::InhomogeneousStack);
        }
        Ok(Self { frames, gate, seed })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn bit_depth(&self) -> u8 {
        self.frames[0].bit_depth()
    }

    pub(crate) fn frames_mut(&mut self) -> &mut [Frame] {
        &mut self.frames
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_bad_length() {
        let err = Frame::new(2, 2, 8, vec![0; 3]).unwrap_err();
        assert_eq!(err, ModelError::BadDataLength { width: 2, height: 2, got: 3 });
    }

    #[test]
    fn frame_rejects_value_over_bit_depth() {
        let err = Frame::new(2, 1, 1, vec![0, 2]).unwrap_err();
        assert_eq!(err, ModelError::ValueOutOfRange { value: 2, max: 1 });
        assert!(Frame::new(2, 1, 8, vec![0, 255]).is_ok());
    }

    #[test]
    fn stack_requires_homogeneous_frames() {
        let a = Frame::zeros(2, 2, 8);
        let b = Frame::zeros(3, 2, 8);
        let gate = GateWindow::new(0, 100, 0.0).unwrap();
        assert_eq!(
            FrameStack::new(vec![a, b], gate, 0).unwrap_err(),
            ModelError::InhomogeneousStack
        );
    }

    #[test]
    fn schedule_gate_positions() {
        let window = GateWindow::new(0, 15_000, 344.0).unwrap();
        let sched = GateSchedule::new(100, 18, 4, window).unwrap();
        assert_eq!(sched.gate_times(), vec![100, 118, 136, 154]);
        assert_eq!(sched.gate_at(3).start_ps, 154);
        assert_eq!(sched.gate_at(3).width_ps, 15_000);
    }

    #[test]
    fn gate_window_validation() {
        assert!(GateWindow::new(0, 0, 0.0).is_err());
        assert!(GateWindow::new(0, 10, -1.0).is_err());
    }
}
