//! Threat-cylinder filtering, free-space masks, and threat-region
//! extraction.
//!
//! The cylinder is attached to the instantaneous heading: its side surface
//! is an iso-TC value, its front cap an iso-TTC plane. A pixel whose point
//! lies inside and ahead is a potential threat, whatever the cause: a
//! stationary obstacle, or a mover whose inflated flow shrinks its apparent
//! TC/TTC below the thresholds. Invalid pixels are never reported as free;
//! the masked region around the focus of expansion is exactly where frontal
//! threats live.

use crate::derotation::AlphaField;
use crate::invariants::InvariantField;

/// Default minimum region size in pixels, suppressing flow-noise speckle.
pub const MIN_REGION_SIZE_DEFAULT: usize = 25;

/// Threat thresholds, either directly in seconds or in meters to be divided
/// by the frame's speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThreatCylinder {
    /// Thresholds on TC and TTC, seconds.
    TimeBased { tc_max: f64, ttc_max: f64 },
    /// Thresholds on the cylinder radius and axial reach, meters.
    DistanceBased { d_max: f64, s_max: f64 },
}

impl ThreatCylinder {
    pub fn time_based(tc_max: f64, ttc_max: f64) -> Self {
        assert!(tc_max > 0.0 && ttc_max > 0.0, "thresholds must be positive");
        Self::TimeBased { tc_max, ttc_max }
    }

    pub fn distance_based(d_max: f64, s_max: f64) -> Self {
        assert!(d_max > 0.0 && s_max > 0.0, "thresholds must be positive");
        Self::DistanceBased { d_max, s_max }
    }

    /// Thresholds in seconds for a frame moving at `speed` m/s.
    pub fn time_thresholds(&self, speed: f64) -> (f64, f64) {
        match *self {
            Self::TimeBased { tc_max, ttc_max } => (tc_max, ttc_max),
            Self::DistanceBased { d_max, s_max } => {
                if speed < 1e-12 {
                    // No translation: nothing has a finite TC anyway.
                    (f64::INFINITY, f64::INFINITY)
                } else {
                    (d_max / speed, s_max / speed)
                }
            }
        }
    }
}

/// Per-pixel segmentation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Label {
    Invalid = 0,
    Free = 1,
    Threat = 2,
}

/// Per-pixel partition into free / threat / invalid.
#[derive(Debug, Clone)]
pub struct SegmentationMask {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
}

/// A 4-connected component of threat pixels.
#[derive(Debug, Clone)]
pub struct ThreatRegion {
    pub id: u32,
    /// Linear pixel indices, ascending.
    pub pixels: Vec<usize>,
    /// `(min_u, min_v, max_u, max_v)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
    pub mean_tc: f64,
    pub mean_ttc: f64,
    /// Mean de-rotation residual, when an alpha field was supplied. High
    /// values hint at an independently moving object.
    pub mean_residual: Option<f64>,
}

/// Labels each pixel against the cylinder: threat iff valid, `0 < tc <=
/// tc_max`, and `0 < ttc <= ttc_max` (inside and ahead). Invalid pixels
/// propagate; receding points (negative TTC) are free.
pub fn threat_mask(inv: &InvariantField, cyl: &ThreatCylinder, speed: f64) -> SegmentationMask {
    let (tc_max, ttc_max) = cyl.time_thresholds(speed);
    let labels = inv
        .valid
        .iter()
        .zip(inv.tc.iter().zip(&inv.ttc))
        .map(|(&valid, (&tc, &ttc))| {
            if !valid {
                Label::Invalid
            } else if tc > 0.0 && tc <= tc_max && ttc > 0.0 && ttc <= ttc_max {
                Label::Threat
            } else {
                Label::Free
            }
        })
        .collect();
    SegmentationMask {
        width: inv.width,
        height: inv.height,
        labels,
    }
}

/// True exactly where the label is `Free`. Invalid pixels are not free:
/// unknown space is treated conservatively.
pub fn free_space_mask(mask: &SegmentationMask) -> Vec<bool> {
    mask.labels.iter().map(|&l| l == Label::Free).collect()
}

/// Extracts 4-connected threat components of at least `min_region_size`
/// pixels, sorted by pixel count descending (ties by first pixel).
///
/// `inv` supplies the per-region TC/TTC means and must match the mask that
/// was computed from it; `residual` optionally adds the mean de-rotation
/// residual from the alpha field.
pub fn connected_regions(
    mask: &SegmentationMask,
    inv: &InvariantField,
    residual: Option<&AlphaField>,
    min_region_size: usize,
) -> Vec<ThreatRegion> {
    let (w, h) = (mask.width, mask.height);
    let mut visited = vec![false; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if visited[start] || mask.labels[start] != Label::Threat {
            continue;
        }
        let mut pixels = Vec::new();
        stack.push(start);
        visited[start] = true;
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = (i % w, i / w);
            let mut push = |j: usize| {
                if !visited[j] && mask.labels[j] == Label::Threat {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                push(i - 1);
            }
            if x + 1 < w {
                push(i + 1);
            }
            if y > 0 {
                push(i - w);
            }
            if y + 1 < h {
                push(i + w);
            }
        }
        if pixels.len() < min_region_size {
            continue;
        }
        pixels.sort_unstable();

        let mut bbox = (usize::MAX, usize::MAX, 0usize, 0usize);
        let mut sum_tc = 0.0;
        let mut sum_ttc = 0.0;
        let mut sum_res = 0.0;
        for &i in &pixels {
            let (x, y) = (i % w, i / w);
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.min(y);
            bbox.2 = bbox.2.max(x);
            bbox.3 = bbox.3.max(y);
            sum_tc += inv.tc[i];
            sum_ttc += inv.ttc[i];
            if let Some(af) = residual {
                sum_res += af.residual[i];
            }
        }
        let count = pixels.len() as f64;
        regions.push(ThreatRegion {
            id: 0,
            pixels,
            bbox,
            mean_tc: sum_tc / count,
            mean_ttc: sum_ttc / count,
            mean_residual: residual.map(|_| sum_res / count),
        });
    }

    regions.sort_by(|a, b| {
        b.pixels
            .len()
            .cmp(&a.pixels.len())
            .then(a.pixels[0].cmp(&b.pixels[0]))
    });
    for (i, r) in regions.iter_mut().enumerate() {
        r.id = i as u32;
    }
    regions
}
