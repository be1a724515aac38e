//! Intrinsics as a JSON key/value file: `{fx, fy, cx, cy, width, height}`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;

pub fn read_intrinsics(path: &Path) -> Result<CameraIntrinsics> {
    let text = std::fs::read_to_string(path)?;
    let intr: CameraIntrinsics = serde_json::from_str(&text).map_err(|e| Error::ParseError {
        line: e.line(),
        msg: e.to_string(),
    })?;
    if intr.fx <= 0.0 || intr.fy <= 0.0 || intr.width == 0 || intr.height == 0 {
        return Err(Error::Config(
            "intrinsics must have positive focal lengths and size".into(),
        ));
    }
    Ok(intr)
}

pub fn write_intrinsics(path: &Path, intr: &CameraIntrinsics) -> Result<()> {
    let mut text = serde_json::to_string_pretty(intr).expect("intrinsics serialize");
    text.push('\n');
    super::atomic_write(path, text.as_bytes())?;
    Ok(())
}
