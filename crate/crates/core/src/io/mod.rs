//! Bit-exact readers and writers for flow, poses, intrinsics, masks, images,
//! and point clouds, plus color-mapped rendering of invariant fields.
//!
//! Binary formats are little-endian except the 16-bit PGM raster, which
//! follows the netpbm most-significant-byte-first convention so that
//! standard viewers can read it. Text formats print floats with at least
//! nine significant digits, which round-trips losslessly through f64.

mod flo;
mod intrinsics;
mod ply;
mod pnm;
mod poses;
mod render;
mod tracks;

pub use flo::{read_flow, write_flow};
pub use intrinsics::{read_intrinsics, write_intrinsics};
pub use ply::{read_cloud_ply, write_cloud_ply, PlyVertex};
pub use pnm::{
    read_mask_pgm, read_pgm16, read_pgm8, read_ppm, write_bool_pgm, write_mask_pgm, write_pgm16,
    write_pgm8, write_ppm, RgbImage,
};
pub use poses::{read_poses, write_poses, PoseRecord};
pub use render::{blend, overlay_boundaries, render_map, RenderSpec, INVALID_GRAY};
pub use tracks::{read_tracks, write_constancy_csv, write_distance_csv, write_tracks};

use std::path::Path;

/// Writes a file atomically: stream to a `.tmp` sibling, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp_name = path.as_os_str().to_os_string();
    tmp_name.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp_name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// Formats a float with nine significant digits, the declared precision of
/// every ASCII format in this crate.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.9e}")
}
