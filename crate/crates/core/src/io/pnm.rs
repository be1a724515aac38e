//! Raw PPM (P6) and PGM (P5) images: codec-free, deterministic outputs.
//!
//! Segmentation masks encode as 0 = invalid, 128 = free, 255 = threat.
//! 16-bit PGM rasters are most-significant-byte first per the netpbm spec.

use std::path::Path;

use crate::error::{Error, Result};
use crate::segmentation::{Label, SegmentationMask};

/// Plain RGB byte image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        Self {
            width,
            height,
            data: vec![color; width * height],
        }
    }
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let mut bytes = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.reserve(img.data.len() * 3);
    for px in &img.data {
        bytes.extend_from_slice(px);
    }
    super::atomic_write(path, &bytes)?;
    Ok(())
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path)?;
    let (dims, raster) = parse_pnm_header(&bytes, b"P6")?;
    let (width, height, maxval) = dims;
    if maxval != 255 {
        return Err(Error::ParseError {
            line: 0,
            msg: format!("unsupported maxval {maxval}"),
        });
    }
    let n = width * height;
    if raster.len() != n * 3 {
        return Err(Error::TruncatedPayload {
            expected: n * 3,
            got: raster.len(),
        });
    }
    let data = raster.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(RgbImage {
        width,
        height,
        data,
    })
}

pub fn write_pgm8(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(data);
    super::atomic_write(path, &bytes)?;
    Ok(())
}

pub fn read_pgm8(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let ((width, height, maxval), raster) = parse_pnm_header(&bytes, b"P5")?;
    if maxval != 255 {
        return Err(Error::ParseError {
            line: 0,
            msg: format!("expected maxval 255, got {maxval}"),
        });
    }
    if raster.len() != width * height {
        return Err(Error::TruncatedPayload {
            expected: width * height,
            got: raster.len(),
        });
    }
    Ok((width, height, raster.to_vec()))
}

pub fn write_pgm16(path: &Path, width: usize, height: usize, data: &[u16]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    let mut bytes = format!("P5\n{width} {height}\n65535\n").into_bytes();
    bytes.reserve(data.len() * 2);
    for v in data {
        bytes.extend_from_slice(&v.to_be_bytes());
    }
    super::atomic_write(path, &bytes)?;
    Ok(())
}

pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bytes = std::fs::read(path)?;
    let ((width, height, maxval), raster) = parse_pnm_header(&bytes, b"P5")?;
    if maxval != 65535 {
        return Err(Error::ParseError {
            line: 0,
            msg: format!("expected maxval 65535, got {maxval}"),
        });
    }
    let n = width * height;
    if raster.len() != n * 2 {
        return Err(Error::TruncatedPayload {
            expected: n * 2,
            got: raster.len(),
        });
    }
    let data = raster
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((width, height, data))
}

pub fn write_mask_pgm(path: &Path, mask: &SegmentationMask) -> Result<()> {
    let data: Vec<u8> = mask
        .labels
        .iter()
        .map(|l| match l {
            Label::Invalid => 0u8,
            Label::Free => 128,
            Label::Threat => 255,
        })
        .collect();
    write_pgm8(path, mask.width, mask.height, &data)
}

pub fn read_mask_pgm(path: &Path) -> Result<SegmentationMask> {
    let (width, height, data) = read_pgm8(path)?;
    let labels = data
        .iter()
        .map(|&b| match b {
            0 => Ok(Label::Invalid),
            128 => Ok(Label::Free),
            255 => Ok(Label::Threat),
            other => Err(Error::ParseError {
                line: 0,
                msg: format!("byte {other} is not a mask label"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentationMask {
        width,
        height,
        labels,
    })
}

/// Boolean mask as 0/255.
pub fn write_bool_pgm(path: &Path, width: usize, height: usize, data: &[bool]) -> Result<()> {
    let bytes: Vec<u8> = data.iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_pgm8(path, width, height, &bytes)
}

/// Width, height, maxval of a PNM header.
type PnmDims = (usize, usize, usize);

/// Parses `magic`, width, height, maxval (whitespace/comment tolerant) and
/// returns the raster after the single whitespace byte that ends the header.
fn parse_pnm_header<'a>(bytes: &'a [u8], magic: &[u8; 2]) -> Result<(PnmDims, &'a [u8])> {
    if bytes.len() < 2 || &bytes[0..2] != magic {
        return Err(Error::ParseError {
            line: 0,
            msg: "bad PNM magic".into(),
        });
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::ParseError {
                line: 0,
                msg: "truncated PNM header".into(),
            });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|e| Error::ParseError {
                line: 0,
                msg: format!("bad PNM field: {e}"),
            })?;
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::ParseError {
            line: 0,
            msg: "missing raster separator".into(),
        });
    }
    pos += 1;
    Ok(((fields[0], fields[1], fields[2]), &bytes[pos..]))
}
