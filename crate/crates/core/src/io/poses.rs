//! Per-frame ego-motion records as CSV: `frame,time,tx,ty,tz,wx,wy,wz`.
//!
//! Velocities, not absolute transforms: the method is instantaneous.
//! Consumers of absolute dataset poses convert externally.

use std::path::Path;

use crate::derotation::EgoMotion;
use crate::error::{Error, Result};
use crate::geometry::Vector3;

const HEADER: &str = "frame,time,tx,ty,tz,wx,wy,wz";

/// One frame's ego-motion: camera-frame translation velocity (m/s) and
/// angular rate (rad/s) at a timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub frame: u32,
    pub time: f64,
    pub t: Vector3,
    pub omega: Vector3,
}

impl PoseRecord {
    pub fn ego(&self) -> EgoMotion {
        EgoMotion {
            t: self.t,
            omega: self.omega,
        }
    }
}

pub fn read_poses(path: &Path) -> Result<Vec<PoseRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut header_seen = false;
    let mut last_time = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(Error::ParseError {
                    line: line_no,
                    msg: format!("expected header \"{HEADER}\", got \"{line}\""),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::ParseError {
                line: line_no,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let frame: u32 = fields[0].parse().map_err(|e| Error::ParseError {
            line: line_no,
            msg: format!("bad frame index: {e}"),
        })?;
        let mut nums = [0.0f64; 7];
        for (k, field) in fields[1..].iter().enumerate() {
            nums[k] = field.parse().map_err(|e| Error::ParseError {
                line: line_no,
                msg: format!("bad float {field:?}: {e}"),
            })?;
        }
        if nums[0] <= last_time {
            return Err(Error::NonMonotonicTime { line: line_no });
        }
        last_time = nums[0];
        records.push(PoseRecord {
            frame,
            time: nums[0],
            t: Vector3::new(nums[1], nums[2], nums[3]),
            omega: Vector3::new(nums[4], nums[5], nums[6]),
        });
    }
    if !header_seen {
        return Err(Error::ParseError {
            line: 0,
            msg: "empty pose file".into(),
        });
    }
    Ok(records)
}

pub fn write_poses(path: &Path, records: &[PoseRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str("# t in m/s (camera frame), omega in rad/s (camera frame)\n");
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.frame,
            fmt(r.time),
            fmt(r.t.x),
            fmt(r.t.y),
            fmt(r.t.z),
            fmt(r.omega.x),
            fmt(r.omega.y),
            fmt(r.omega.z),
        ));
    }
    super::atomic_write(path, out.as_bytes())?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}
