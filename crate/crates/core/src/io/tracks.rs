//! Feature-track CSV input (`frame,id,u,v`) and the distance/constancy
//! tables derived from tracked domain points.

use std::path::Path;

use crate::domain::{ConstancyError, DistanceMatrix, TrackObservation};
use crate::error::{Error, Result};

const HEADER: &str = "frame,id,u,v";

pub fn read_tracks(path: &Path) -> Result<Vec<TrackObservation>> {
    let text = std::fs::read_to_string(path)?;
    let mut observations = Vec::new();
    let mut header_seen = false;
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
        if fields.len() != 4 {
            return Err(Error::ParseError {
                line: line_no,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str, e: String| Error::ParseError {
            line: line_no,
            msg: format!("bad {what}: {e}"),
        };
        observations.push(TrackObservation {
            frame: fields[0]
                .parse()
                .map_err(|e: std::num::ParseIntError| bad("frame", e.to_string()))?,
            id: fields[1]
                .parse()
                .map_err(|e: std::num::ParseIntError| bad("id", e.to_string()))?,
            u: fields[2]
                .parse()
                .map_err(|e: std::num::ParseFloatError| bad("u", e.to_string()))?,
            v: fields[3]
                .parse()
                .map_err(|e: std::num::ParseFloatError| bad("v", e.to_string()))?,
        });
    }
    if !header_seen {
        return Err(Error::ParseError {
            line: 0,
            msg: "empty track file".into(),
        });
    }
    Ok(observations)
}

pub fn write_tracks(path: &Path, observations: &[TrackObservation]) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for o in observations {
        out.push_str(&format!(
            "{},{},{},{}\n",
            o.frame,
            o.id,
            super::fmt_f64(o.u),
            super::fmt_f64(o.v)
        ));
    }
    super::atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Pairwise distances as CSV with a labeled first row/column.
pub fn write_distance_csv(path: &Path, ids: &[u32], m: &DistanceMatrix) -> Result<()> {
    assert_eq!(ids.len(), m.n);
    let mut out = String::from("id");
    for id in ids {
        out.push_str(&format!(",{id}"));
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(&id.to_string());
        for j in 0..m.n {
            out.push_str(&format!(",{}", super::fmt_f64(m.get(i, j))));
        }
        out.push('\n');
    }
    super::atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Constancy summary rows: `frame_a,frame_b,pairs,max_rel,mean_rel`.
pub fn write_constancy_csv(path: &Path, rows: &[(u32, u32, ConstancyError)]) -> Result<()> {
    let mut out = String::from("frame_a,frame_b,pairs,max_rel,mean_rel\n");
    for (a, b, e) in rows {
        out.push_str(&format!(
            "{a},{b},{},{},{}\n",
            e.pairs,
            super::fmt_f64(e.max_rel),
            super::fmt_f64(e.mean_rel)
        ));
    }
    super::atomic_write(path, out.as_bytes())?;
    Ok(())
}
