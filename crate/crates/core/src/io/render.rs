//! Color-mapped rendering of invariant fields.
//!
//! Low values map to deep red and high values to white; invalid pixels get a
//! reserved neutral gray. Band boundaries can be drawn on top, or onto a
//! source image.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::invariants::BandMap;

use super::pnm::RgbImage;

/// Reserved color of invalid pixels.
pub const INVALID_GRAY: [u8; 3] = [128, 128, 128];

/// Value range and band edges of a rendered map.
#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub vmin: f64,
    pub vmax: f64,
    /// Strictly ascending edges; empty disables banding.
    pub band_edges: Vec<f64>,
    /// Draw band boundaries over the color ramp.
    pub draw_boundaries: bool,
    /// Color of boundary lines.
    pub boundary_color: [u8; 3],
}

impl RenderSpec {
    pub fn new(vmin: f64, vmax: f64) -> Result<Self> {
        // NaN bounds must fail too, so compare through partial_cmp.
        if vmin.partial_cmp(&vmax) != Some(std::cmp::Ordering::Less) {
            return Err(Error::BadValueRange {
                min: vmin,
                max: vmax,
            });
        }
        Ok(Self {
            vmin,
            vmax,
            band_edges: Vec::new(),
            draw_boundaries: false,
            boundary_color: [0, 0, 255],
        })
    }

    pub fn with_bands(mut self, edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadBandEdges);
        }
        self.band_edges = edges;
        self.draw_boundaries = true;
        Ok(self)
    }
}

#[inline]
fn ramp(value: f64, vmin: f64, vmax: f64) -> [u8; 3] {
    let t = ((value - vmin) / (vmax - vmin)).clamp(0.0, 1.0);
    let gb = (t * 255.0).round() as u8;
    [255, gb, gb]
}

/// Renders a scalar field: valid pixels through the white-to-red ramp
/// (lower value, deeper red), invalid pixels as [`INVALID_GRAY`], plus the
/// optional band-boundary overlay.
pub fn render_map(
    values: &[f64],
    valid: &[bool],
    width: usize,
    height: usize,
    spec: &RenderSpec,
) -> Result<RgbImage> {
    if values.len() != width * height || valid.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected_width: width,
            expected_height: height,
            got_width: values.len(),
            got_height: 1,
        });
    }
    let mut img = RgbImage::filled(width, height, INVALID_GRAY);
    img.data
        .par_chunks_mut(width)
        .zip(values.par_chunks(width))
        .zip(valid.par_chunks(width))
        .for_each(|((out, vals), ok)| {
            for x in 0..out.len() {
                if ok[x] && vals[x].is_finite() {
                    out[x] = ramp(vals[x], spec.vmin, spec.vmax);
                }
            }
        });

    if spec.draw_boundaries && !spec.band_edges.is_empty() {
        let bands = crate::invariants::iso_bands(values, valid, width, height, &spec.band_edges)?;
        overlay_boundaries(&mut img, &bands, spec.boundary_color)?;
    }
    Ok(img)
}

/// Paints band-boundary pixels onto an image (a rendered map or a source
/// frame).
pub fn overlay_boundaries(img: &mut RgbImage, bands: &BandMap, color: [u8; 3]) -> Result<()> {
    if (img.width, img.height) != (bands.width, bands.height) {
        return Err(Error::DimensionMismatch {
            expected_width: img.width,
            expected_height: img.height,
            got_width: bands.width,
            got_height: bands.height,
        });
    }
    for (px, &b) in img.data.iter_mut().zip(&bands.boundary) {
        if b {
            *px = color;
        }
    }
    Ok(())
}

/// Alpha-blends `top` over `base`: `out = (1 - alpha) base + alpha top`.
pub fn blend(base: &RgbImage, top: &RgbImage, alpha: f64) -> Result<RgbImage> {
    if (base.width, base.height) != (top.width, top.height) {
        return Err(Error::DimensionMismatch {
            expected_width: base.width,
            expected_height: base.height,
            got_width: top.width,
            got_height: top.height,
        });
    }
    let a = alpha.clamp(0.0, 1.0);
    let data = base
        .data
        .iter()
        .zip(&top.data)
        .map(|(b, t)| {
            let mut px = [0u8; 3];
            for c in 0..3 {
                px[c] = ((1.0 - a) * b[c] as f64 + a * t[c] as f64).round() as u8;
            }
            px
        })
        .collect();
    Ok(RgbImage {
        width: base.width,
        height: base.height,
        data,
    })
}
