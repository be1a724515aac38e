//! The invariant-based 3D domain in which stationary structure keeps its
//! shape while the camera moves.
//!
//! A pixel maps to the point `(d, s_axial, gamma)`: cylinder radius,
//! distance ahead along the heading, and azimuth. Its Cartesian embedding
//! `s t̂ + d (cos(gamma) e1 + sin(gamma) e2)` reconstructs the scene point in
//! the camera frame, so pairwise distances between embedded stationary
//! points are preserved over time. Constancy is evaluated on those
//! distances, not on the raw triples: `s_axial` shrinks as the camera
//! advances even though shape is rigid.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AlphaGammaField, TranslationFrame, Vector3};
use crate::invariants::ScaledInvariants;

/// Default pixel stride when sampling a dense field into a cloud.
pub const STRIDE_DEFAULT: usize = 4;

/// Pairs closer than this in the reference frame are excluded from relative
/// deviations.
const MIN_PAIR_DISTANCE: f64 = 1e-9;

/// One point of the constancy domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPoint {
    /// Cylinder radius (distance from the translation axis), m.
    pub d: f64,
    /// Distance ahead along the heading, m (signed).
    pub s_axial: f64,
    /// Azimuth about the heading, rad.
    pub gamma: f64,
    /// Cartesian embedding in the camera frame, m.
    pub cartesian: Vector3,
}

impl DomainPoint {
    /// Embeds `(d, s_axial, gamma)` through the given frame.
    pub fn new(d: f64, s_axial: f64, gamma: f64, frame: &TranslationFrame) -> Self {
        let (sg, cg) = gamma.sin_cos();
        let cartesian = s_axial * frame.t_hat.into_inner()
            + d * (cg * frame.e1.into_inner() + sg * frame.e2.into_inner());
        Self {
            d,
            s_axial,
            gamma,
            cartesian,
        }
    }
}

/// A cloud sample with its source pixel.
#[derive(Debug, Clone, Copy)]
pub struct CloudPoint {
    pub u: usize,
    pub v: usize,
    pub point: DomainPoint,
}

/// Domain points of one frame; masked pixels are excluded.
#[derive(Debug, Clone)]
pub struct DomainPointCloud {
    pub frame_id: u32,
    /// Speed used for the d/s scaling, m/s.
    pub speed: f64,
    pub points: Vec<CloudPoint>,
}

/// A feature observed in two or more frames.
#[derive(Debug, Clone, Default)]
pub struct FeatureTrack {
    pub id: u32,
    /// Pixel location per frame.
    pub pixels: BTreeMap<u32, (f64, f64)>,
    /// Domain point per frame, once fields are available.
    pub points: BTreeMap<u32, DomainPoint>,
}

/// One row of a feature-track file: `frame,id,u,v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackObservation {
    pub frame: u32,
    pub id: u32,
    pub u: f64,
    pub v: f64,
}

/// Groups raw observations into tracks, dropping features seen in fewer
/// than two frames.
pub fn group_tracks(observations: &[TrackObservation]) -> Vec<FeatureTrack> {
    let mut by_id: BTreeMap<u32, FeatureTrack> = BTreeMap::new();
    for obs in observations {
        let track = by_id.entry(obs.id).or_insert_with(|| FeatureTrack {
            id: obs.id,
            ..FeatureTrack::default()
        });
        track.pixels.insert(obs.frame, (obs.u, obs.v));
    }
    by_id
        .into_values()
        .filter(|t| t.pixels.len() >= 2)
        .collect()
}

/// Symmetric pairwise-distance matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Max/mean relative deviation of pairwise distances between two frames.
#[derive(Debug, Clone, Copy)]
pub struct ConstancyError {
    pub max_rel: f64,
    pub mean_rel: f64,
    /// Number of pairs that entered the statistics.
    pub pairs: usize,
}

/// Samples every `stride`-th valid pixel of a scaled invariant field into a
/// domain cloud.
///
/// Pixels with negative `d` are excluded along with masked ones: a negative
/// TC can only come from a receding independent mover, for which the
/// stationary-world embedding has no geometric meaning.
pub fn to_domain_cloud(
    scaled: &ScaledInvariants,
    gammas: &AlphaGammaField,
    frame: &TranslationFrame,
    frame_id: u32,
    stride: usize,
) -> Result<DomainPointCloud> {
    assert!(stride >= 1, "stride must be at least 1");
    if (scaled.width, scaled.height) != (gammas.width, gammas.height) {
        return Err(Error::DimensionMismatch {
            expected_width: scaled.width,
            expected_height: scaled.height,
            got_width: gammas.width,
            got_height: gammas.height,
        });
    }

    let rows: Vec<Vec<CloudPoint>> = (0..scaled.height)
        .into_par_iter()
        .step_by(stride)
        .map(|v| {
            let mut row_points = Vec::new();
            for u in (0..scaled.width).step_by(stride) {
                let idx = v * scaled.width + u;
                if !scaled.valid[idx] || scaled.d[idx] < 0.0 {
                    continue;
                }
                let point = DomainPoint::new(
                    scaled.d[idx],
                    scaled.s_axial[idx],
                    gammas.values[idx].gamma,
                    frame,
                );
                row_points.push(CloudPoint { u, v, point });
            }
            row_points
        })
        .collect();

    Ok(DomainPointCloud {
        frame_id,
        speed: scaled.speed,
        points: rows.into_iter().flatten().collect(),
    })
}

/// Euclidean distances between the Cartesian embeddings of a point list.
pub fn pairwise_distances(points: &[DomainPoint]) -> Result<DistanceMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = (points[i].cartesian - points[j].cartesian).norm();
            data[i * n + j] = dist;
            data[j * n + i] = dist;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Relative deviation of pairwise distances between two frames of a track
/// set: `|D_a(i,j) - D_b(i,j)| / D_a(i,j)` over all pairs of tracks present
/// in both frames.
pub fn constancy_error(
    tracks: &[FeatureTrack],
    frame_a: u32,
    frame_b: u32,
) -> Result<ConstancyError> {
    let shared: Vec<(&DomainPoint, &DomainPoint)> = tracks
        .iter()
        .filter_map(|t| Some((t.points.get(&frame_a)?, t.points.get(&frame_b)?)))
        .collect();
    if shared.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: shared.len(),
        });
    }

    let mut max_rel = 0.0_f64;
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..shared.len() {
        for j in (i + 1)..shared.len() {
            let da = (shared[i].0.cartesian - shared[j].0.cartesian).norm();
            if da < MIN_PAIR_DISTANCE {
                continue;
            }
            let db = (shared[i].1.cartesian - shared[j].1.cartesian).norm();
            let rel = (da - db).abs() / da;
            max_rel = max_rel.max(rel);
            sum += rel;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::TooFewPoints { needed: 2, got: 1 });
    }
    Ok(ConstancyError {
        max_rel,
        mean_rel: sum / pairs as f64,
        pairs,
    })
}
