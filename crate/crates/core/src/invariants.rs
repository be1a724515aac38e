//! Per-pixel time-clearance and time-to-contact fields, their speed-scaled
//! geometric counterparts, and iso-value banding.
//!
//! For a stationary point seen under pure translation,
//! `TC = sin^2(alpha) / alpha_dot` is the time to clear the cylinder of
//! radius `d = r sin(alpha)` around the heading, and
//! `TTC = sin(2 alpha) / (2 alpha_dot)` is the time to reach the plane at
//! `s = r cos(alpha)` ahead. Multiplying by speed recovers `d` and `s`.

use rayon::prelude::*;

use crate::derotation::AlphaField;
use crate::error::{Error, Result};

/// Default alpha-rate floor, rad/s. Below this the quotient amplifies flow
/// noise beyond usefulness and the pixel is masked.
pub const EPS_RATE_DEFAULT: f64 = 1e-6;

/// Sentinel band index of invalid pixels in a [`BandMap`].
pub const BAND_INVALID: u32 = u32::MAX;

/// Per-pixel TC and TTC in seconds.
///
/// Points behind the abeam plane (alpha > pi/2) carry a negative TTC;
/// receding points are meaningful and kept signed rather than masked.
#[derive(Debug, Clone)]
pub struct InvariantField {
    pub width: usize,
    pub height: usize,
    /// Time-clearance, s. Zero where not valid.
    pub tc: Vec<f64>,
    /// Time-to-contact, s. Zero where not valid.
    pub ttc: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Speed-scaled invariants: cylinder radius `d` and axial distance `s`.
#[derive(Debug, Clone)]
pub struct ScaledInvariants {
    pub width: usize,
    pub height: usize,
    /// Distance from the translation axis, m.
    pub d: Vec<f64>,
    /// Distance ahead along the translation axis, m (signed).
    pub s_axial: Vec<f64>,
    pub valid: Vec<bool>,
    /// Speed used for scaling, m/s.
    pub speed: f64,
}

/// Band index plus boundary mask of a scalar field against fixed edges.
#[derive(Debug, Clone)]
pub struct BandMap {
    pub width: usize,
    pub height: usize,
    /// Count of edges strictly below the pixel value; [`BAND_INVALID`] where
    /// the field is invalid.
    pub band: Vec<u32>,
    /// True on pixels whose right or down neighbor lies in another band.
    pub boundary: Vec<bool>,
}

/// Computes TC and TTC from an alpha field.
///
/// Pixels where `|alpha_dot| < eps_rate` are masked in addition to the
/// mask inherited from the alpha field. Output is never NaN/Inf.
pub fn compute_invariants(af: &AlphaField, eps_rate: f64) -> InvariantField {
    let n = af.alpha.len();
    let w = af.width;
    let mut tc = vec![0.0; n];
    let mut ttc = vec![0.0; n];
    let mut valid = vec![false; n];

    tc.par_chunks_mut(w)
        .zip(ttc.par_chunks_mut(w))
        .zip(valid.par_chunks_mut(w))
        .zip(af.alpha.par_chunks(w))
        .zip(af.alpha_dot.par_chunks(w))
        .zip(af.valid.par_chunks(w))
        .for_each(|(((((tc_row, ttc_row), v_row), alpha), alpha_dot), av)| {
            for x in 0..tc_row.len() {
                let ad = alpha_dot[x];
                if !av[x] || ad.abs() < eps_rate {
                    continue;
                }
                let (sa, ca) = alpha[x].sin_cos();
                let inv = 1.0 / ad;
                tc_row[x] = sa * sa * inv;
                ttc_row[x] = sa * ca * inv; // sin(2a)/(2 a_dot)
                v_row[x] = true;
            }
        });

    InvariantField {
        width: af.width,
        height: af.height,
        tc,
        ttc,
        valid,
    }
}

/// Multiplies TC and TTC by the translation speed, yielding meters.
pub fn scale_by_speed(inv: &InvariantField, speed: f64) -> Result<ScaledInvariants> {
    if speed < 1e-12 {
        return Err(Error::ZeroTranslation { speed, min: 1e-12 });
    }
    let scale = |v: &[f64]| v.iter().map(|x| x * speed).collect::<Vec<_>>();
    Ok(ScaledInvariants {
        width: inv.width,
        height: inv.height,
        d: scale(&inv.tc),
        s_axial: scale(&inv.ttc),
        valid: inv.valid.clone(),
        speed,
    })
}

/// Quantizes a scalar field into bands and marks band boundaries.
///
/// The boundary pass reads a 4-neighborhood and therefore runs after all
/// band indices are assigned. Comparisons against invalid pixels are
/// skipped, so coverage borders are not reported as iso-lines.
pub fn iso_bands(
    values: &[f64],
    valid: &[bool],
    width: usize,
    height: usize,
    edges: &[f64],
) -> Result<BandMap> {
    if edges.is_empty() || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadBandEdges);
    }
    if values.len() != width * height || valid.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected_width: width,
            expected_height: height,
            got_width: values.len(),
            got_height: 1,
        });
    }

    let mut band = vec![BAND_INVALID; values.len()];
    band.par_chunks_mut(width)
        .zip(values.par_chunks(width))
        .zip(valid.par_chunks(width))
        .for_each(|((band_row, val_row), v_row)| {
            for x in 0..band_row.len() {
                if v_row[x] {
                    band_row[x] = edges.partition_point(|e| *e < val_row[x]) as u32;
                }
            }
        });

    let mut boundary = vec![false; values.len()];
    boundary
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, b_row)| {
            for (x, out) in b_row.iter_mut().enumerate() {
                let i = y * width + x;
                if band[i] == BAND_INVALID {
                    continue;
                }
                let right = x + 1 < width && band[i + 1] != BAND_INVALID && band[i + 1] != band[i];
                let down =
                    y + 1 < height && band[i + width] != BAND_INVALID && band[i + width] != band[i];
                *out = right || down;
            }
        });

    Ok(BandMap {
        width,
        height,
        band,
        boundary,
    })
}
