//! Middlebury-style `.flo` container: `"PIEH"`, little-endian i32 width and
//! height, then row-major float32 `(u, v)` pairs.

use std::path::Path;

use crate::derotation::FlowField;
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"PIEH";
const MAX_PIXELS: i64 = 100_000_000;

/// Reads a flow file. The container carries no timing, so `frame_dt` is set
/// to 1.0; callers overwrite it from pose timestamps.
pub fn read_flow(path: &Path) -> Result<FlowField> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 12 {
        return Err(Error::TruncatedPayload {
            expected: 12,
            got: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 || width as i64 * height as i64 > MAX_PIXELS {
        return Err(Error::OversizeDims { width, height });
    }
    let n = width as usize * height as usize;
    let expected = 12 + n * 8;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::ParseError {
            line: 0,
            msg: format!(
                "{} trailing bytes after flow payload",
                bytes.len() - expected
            ),
        });
    }

    let mut flow = Vec::with_capacity(n);
    for px in bytes[12..].chunks_exact(8) {
        let du = f32::from_le_bytes(px[0..4].try_into().unwrap());
        let dv = f32::from_le_bytes(px[4..8].try_into().unwrap());
        flow.push([du as f64, dv as f64]);
    }
    Ok(FlowField {
        width: width as usize,
        height: height as usize,
        frame_dt: 1.0,
        flow,
    })
}

/// Writes a flow field at float32 precision, atomically.
pub fn write_flow(path: &Path, flow: &FlowField) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + flow.flow.len() * 8);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&(flow.width as i32).to_le_bytes());
    bytes.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for [du, dv] in &flow.flow {
        bytes.extend_from_slice(&(*du as f32).to_le_bytes());
        bytes.extend_from_slice(&(*dv as f32).to_le_bytes());
    }
    super::atomic_write(path, &bytes)?;
    Ok(())
}
