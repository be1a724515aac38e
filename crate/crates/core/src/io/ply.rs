//! ASCII PLY point clouds with the source pixel kept per vertex.

use std::path::Path;

use crate::domain::DomainPointCloud;
use crate::error::{Error, Result};

const HEADER_PROPS: [&str; 5] = [
    "property double x",
    "property double y",
    "property double z",
    "property uint u",
    "property uint v",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlyVertex {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: u32,
    pub v: u32,
}

pub fn write_cloud_ply(path: &Path, cloud: &DomainPointCloud) -> Result<()> {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.points.len()));
    for prop in HEADER_PROPS {
        out.push_str(prop);
        out.push('\n');
    }
    out.push_str("end_header\n");
    for p in &cloud.points {
        let c = p.point.cartesian;
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            super::fmt_f64(c.x),
            super::fmt_f64(c.y),
            super::fmt_f64(c.z),
            p.u,
            p.v
        ));
    }
    super::atomic_write(path, out.as_bytes())?;
    Ok(())
}

fn expect_line(lines: &mut std::iter::Enumerate<std::str::Lines<'_>>, want: &str) -> Result<()> {
    match lines.next() {
        Some((_, line)) if line == want => Ok(()),
        Some((i, line)) => Err(Error::ParseError {
            line: i + 1,
            msg: format!("expected \"{want}\", got \"{line}\""),
        }),
        None => Err(Error::ParseError {
            line: 0,
            msg: "truncated PLY header".into(),
        }),
    }
}

pub fn read_cloud_ply(path: &Path) -> Result<Vec<PlyVertex>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    expect_line(&mut lines, "ply")?;
    expect_line(&mut lines, "format ascii 1.0")?;
    let count: usize = match lines.next() {
        Some((i, line)) => {
            let rest = line
                .strip_prefix("element vertex ")
                .ok_or(Error::ParseError {
                    line: i + 1,
                    msg: format!("expected vertex element, got \"{line}\""),
                })?;
            rest.parse().map_err(|e| Error::ParseError {
                line: i + 1,
                msg: format!("bad vertex count: {e}"),
            })?
        }
        None => {
            return Err(Error::ParseError {
                line: 0,
                msg: "truncated PLY header".into(),
            })
        }
    };
    for prop in HEADER_PROPS {
        expect_line(&mut lines, prop)?;
    }
    expect_line(&mut lines, "end_header")?;

    let mut vertices = Vec::with_capacity(count);
    for (i, line) in lines {
        let mut fields = line.split_ascii_whitespace();
        let mut take = |what: &str| {
            fields.next().ok_or(Error::ParseError {
                line: i + 1,
                msg: format!("missing {what}"),
            })
        };
        let parse_err = |e, line| Error::ParseError {
            line,
            msg: format!("bad number: {e}"),
        };
        vertices.push(PlyVertex {
            x: take("x")?.parse().map_err(|e| parse_err(e, i + 1))?,
            y: take("y")?.parse().map_err(|e| parse_err(e, i + 1))?,
            z: take("z")?.parse().map_err(|e| parse_err(e, i + 1))?,
            u: take("u")?.parse().map_err(|_| Error::ParseError {
                line: i + 1,
                msg: "bad pixel index".into(),
            })?,
            v: take("v")?.parse().map_err(|_| Error::ParseError {
                line: i + 1,
                msg: "bad pixel index".into(),
            })?,
        });
    }
    if vertices.len() != count {
        return Err(Error::TruncatedPayload {
            expected: count,
            got: vertices.len(),
        });
    }
    Ok(vertices)
}
