//! Persistent frame-stack format.
//!
//! Layout (little-endian):
//!   magic "QLFS", version u16, width u16, height u16, bit_depth u8,
//!   frame_count u32, gate_start_ps u64, gate_width_ps u64, seed u64,
//! followed by `frame_count` frames row-major, one unsigned byte per pixel.
//!
//! The header does not carry the gate edge softness; stacks read back get a
//! hard-edged window.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{Frame, FrameStack, GateWindow, ModelError};

pub const MAGIC: [u8; 4] = *b"QLFS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 2 + 2 + 1 + 4 + 8 + 8 + 8;

#[derive(Debug, Error)]
pub enum StackFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes: expected \"QLFS\"")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated body: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("unexpected {0} trailing bytes after the frame body")]
    TrailingBytes(usize),
    #[error("grid {width}x{height} does not fit the u16 header fields")]
    GridTooLarge { width: usize, height: usize },
    #[error("gate start {0} ps is negative and cannot be stored")]
    NegativeGateStart(i64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn write_frame_stack(stack: &FrameStack, path: &Path) -> Result<(), StackFileError> {
    let (w, h) = (stack.width(), stack.height());
    if w > usize::from(u16::MAX) || h > usize::from(u16::MAX) {
        return Err(StackFileError::GridTooLarge { width: w, height: h });
    }
    if stack.gate.start_ps < 0 {
        return Err(StackFileError::NegativeGateStart(stack.gate.start_ps));
    }

    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(w as u16).to_le_bytes())?;
    out.write_all(&(h as u16).to_le_bytes())?;
    out.write_all(&[stack.bit_depth()])?;
    out.write_all(&(stack.len() as u32).to_le_bytes())?;
    out.write_all(&(stack.gate.start_ps as u64).to_le_bytes())?;
    out.write_all(&(stack.gate.width_ps as u64).to_le_bytes())?;
    out.write_all(&stack.seed.to_le_bytes())?;
    for frame in stack.frames() {
        out.write_all(frame.data())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_frame_stack(path: &Path) -> Result<FrameStack, StackFileError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    reader.read_exact(&mut header).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            StackFileError::Truncated { expected: HEADER_LEN, got: 0 }
        } else {
            StackFileError::Io(e)
        }
    })?;

    if header[0..4] != MAGIC {
        return Err(StackFileError::BadMagic);
    }
    let u16_at = |i: usize| u16::from_le_bytes([header[i], header[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());

    let version = u16_at(4);
    if version != VERSION {
        return Err(StackFileError::UnsupportedVersion(version));
    }
    let width = usize::from(u16_at(6));
    let height = usize::from(u16_at(8));
    let bit_depth = header[10];
    let frame_count = u32_at(11) as usize;
    let gate_start = u64_at(15) as i64;
    let gate_width = u64_at(23) as i64;
    let seed = u64_at(31);

    let frame_len = width * height;
    let expected = frame_count * frame_len;
    let mut body = Vec::with_capacity(expected);
    reader.read_to_end(&mut body)?;
    if body.len() < expected {
        return Err(StackFileError::Truncated { expected, got: body.len() });
    }
    if body.len() > expected {
        return Err(StackFileError::TrailingBytes(body.len() - expected));
    }

    let frames = body
        .chunks_exact(frame_len)
        .map(|chunk| Frame::new(width, height, bit_depth, chunk.to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let gate = GateWindow::new(gate_start, gate_width, 0.0)?;
    Ok(FrameStack::new(frames, gate, seed)?)
}
