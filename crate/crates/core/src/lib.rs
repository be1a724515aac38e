//! Optical-flow motion invariants.
//!
//! Dense optical flow plus camera ego-motion is transformed into per-pixel
//! time-clearance (TC) and time-to-contact (TTC) fields. The chain is:
//!
//! ```text
//! image flow ──> spherical flow ──> de-rotated flow ──> alpha, alpha_dot
//!                                                           │
//!                 TC = sin^2(alpha) / alpha_dot  <──────────┤
//!                 TTC = sin(2 alpha) / (2 alpha_dot) <──────┘
//! ```
//!
//! Scaled by speed, TC and TTC become the cylinder radius `d` and the axial
//! distance `s` of each point relative to the heading, which yields:
//!
//! * threat/free-space segmentation against an invariant cylinder
//!   ([`segmentation`]),
//! * a point-cloud domain in which stationary structure keeps its pairwise
//!   distances while the camera moves ([`domain`]),
//! * an analytic scene simulator with exact ground truth that doubles as
//!   the verification oracle for the whole chain ([`sim`]).
//!
//! Everything per-pixel is a pure data-parallel map (rayon); fields are
//! immutable after construction.

pub mod derotation;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod segmentation;
pub mod sim;

pub use derotation::{
    alpha_rate, derotate, eps_axis_default, image_flow_to_spherical, rotational_component,
    AlphaField, EgoMotion, FlowField, SphericalFlow,
};
pub use domain::{
    constancy_error, group_tracks, pairwise_distances, to_domain_cloud, ConstancyError,
    DistanceMatrix, DomainPoint, DomainPointCloud, FeatureTrack, TrackObservation,
};
pub use error::{Error, Result};
pub use geometry::{
    alpha_gamma_map, AlphaGamma, AlphaGammaField, CameraIntrinsics, DirectionGrid,
    SphericalDirection, TranslationFrame, UnitVector3, Vector3,
};
pub use invariants::{
    compute_invariants, iso_bands, scale_by_speed, BandMap, InvariantField, ScaledInvariants,
    EPS_RATE_DEFAULT,
};
pub use segmentation::{
    connected_regions, free_space_mask, threat_mask, Label, SegmentationMask, ThreatCylinder,
    ThreatRegion,
};
