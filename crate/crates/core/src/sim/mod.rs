//! Analytic scene simulator: primitive geometry, scripted 6DoF camera
//! trajectories, and exact depth/flow/invariant ground truth.
//!
//! The simulator plays the role of a perfect IMU plus a perfect flow
//! estimator, and doubles as the verification oracle: ground-truth TC/TTC
//! for stationary points come from closed-form geometry (`d = r sin(alpha)`,
//! `s = r cos(alpha)`) with no flow involved, so running the full pipeline
//! on simulated flow checks the whole chain against an independent route.
//!
//! Conventions: a camera pose maps camera coordinates to world coordinates
//! (`X_w = R X_c + p`); `t` and `omega` are camera-frame velocities. The
//! rigid motion field of a point at camera-frame position `P` is
//! `Ṗ = v_point - t - omega x P`.

mod config;
mod render;

pub use config::{CameraConfig, PrimitiveConfig, PrimitiveKind, SceneConfig};
pub use render::{generate_sequence, render_frame};

use crate::derotation::{alpha_rate_at, rotational_component, EgoMotion};
use crate::error::{Error, Result};
use crate::geometry::{AlphaGamma, TranslationFrame, UnitVector3, Vector3};

/// Rigid camera pose, camera-to-world.
pub type Pose = nalgebra::Isometry3<f64>;

/// Geometry of a scene object in its local frame.
#[derive(Debug, Clone)]
pub enum Shape {
    /// Axis-aligned box centered at the local origin; `size` holds full
    /// extents.
    Box { size: Vector3 },
    /// Rectangle in the local xy plane at z = 0; `extent` holds full
    /// extents along local x and y.
    Plane { extent: [f64; 2] },
    /// Explicit points, splatted to their pixel rather than ray-cast.
    PointSet { points: Vec<Vector3> },
}

/// A scene object: shape, rigid pose, and world-frame velocity (zero for
/// stationary objects).
#[derive(Debug, Clone)]
pub struct ScenePrimitive {
    pub shape: Shape,
    pub pose: Pose,
    pub velocity: Vector3,
}

impl ScenePrimitive {
    pub fn stationary_box(center: Vector3, size: Vector3) -> Self {
        Self::moving_box(center, size, Vector3::zeros())
    }

    pub fn moving_box(center: Vector3, size: Vector3, velocity: Vector3) -> Self {
        assert!(size.min() > 0.0, "box extents must be positive");
        Self {
            shape: Shape::Box { size },
            pose: Pose::from_parts(center.into(), nalgebra::UnitQuaternion::identity()),
            velocity,
        }
    }

    /// Horizontal ground plane at camera-down height `y` (the camera up axis
    /// is -y), spanning `extent` meters in x and z.
    pub fn ground_plane(y: f64, extent: [f64; 2]) -> Self {
        // Rotate the local z axis onto world -y so the rectangle spans x/z.
        let rot = nalgebra::UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_unchecked(Vector3::new(1.0, 0.0, 0.0)),
            std::f64::consts::FRAC_PI_2,
        );
        Self {
            shape: Shape::Plane { extent },
            pose: Pose::from_parts(Vector3::new(0.0, y, 0.0).into(), rot),
            velocity: Vector3::zeros(),
        }
    }

    pub fn point_set(points: Vec<Vector3>) -> Self {
        Self {
            shape: Shape::PointSet { points },
            pose: Pose::identity(),
            velocity: Vector3::zeros(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.velocity.norm() < 1e-15
    }
}

/// One trajectory sample: pose plus instantaneous camera-frame velocities.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub time: f64,
    pub pose: Pose,
    /// Translation velocity in the camera frame, m/s.
    pub t: Vector3,
    /// Angular rate in the camera frame, rad/s.
    pub omega: Vector3,
}

impl TrajectorySample {
    pub fn ego(&self) -> EgoMotion {
        EgoMotion {
            t: self.t,
            omega: self.omega,
        }
    }
}

/// Exact trajectory with constant world velocity and constant body angular
/// rate: `p(t) = p0 + v t`, `R(t) = R0 exp([omega] t)`.
///
/// Closed form at every sample, so there is no integration error; the
/// camera-frame translation `t = R(t)^T v` varies with the attitude.
pub fn constant_world_velocity_trajectory(
    start: Pose,
    velocity_world: Vector3,
    omega_body: Vector3,
    dt: f64,
    count: usize,
) -> Vec<TrajectorySample> {
    assert!(dt > 0.0 && count > 0);
    (0..count)
        .map(|k| {
            let time = k as f64 * dt;
            let rot =
                start.rotation * nalgebra::UnitQuaternion::from_scaled_axis(omega_body * time);
            let pos = start.translation.vector + velocity_world * time;
            TrajectorySample {
                time,
                pose: Pose::from_parts(pos.into(), rot),
                t: rot.inverse() * velocity_world,
                omega: omega_body,
            }
        })
        .collect()
}

/// A scene point resolved against one trajectory sample.
#[derive(Debug, Clone, Copy)]
pub struct SimPoint {
    /// World position, m.
    pub world: Vector3,
    /// Camera-frame position, m.
    pub cam: Vector3,
    /// Range from the camera, m.
    pub range: f64,
    pub r_hat: UnitVector3,
    /// Analytic spherical-flow rate, rad/s.
    pub rate: Vector3,
}

/// Spherical motion field of a point at camera-frame position `p_cam`:
/// `Ṗ = v_point - t - omega x P` projected onto the tangent plane and
/// divided by range.
pub fn motion_field(
    p_cam: &Vector3,
    ego: &EgoMotion,
    point_velocity: &Vector3,
) -> Result<(UnitVector3, Vector3)> {
    let range = p_cam.norm();
    if range < 1e-9 {
        return Err(Error::DegeneratePoint { range });
    }
    let r_hat = UnitVector3::new_unchecked(p_cam / range);
    let p_dot = point_velocity - ego.t - ego.omega.cross(p_cam);
    let rate = (p_dot - p_dot.dot(&r_hat) * r_hat.into_inner()) / range;
    Ok((r_hat, rate))
}

/// Resolves a world point under a trajectory sample.
pub fn sim_point(
    world: &Vector3,
    sample: &TrajectorySample,
    point_velocity_world: &Vector3,
) -> Result<SimPoint> {
    let rot_inv = sample.pose.rotation.inverse();
    let cam = rot_inv * (world - sample.pose.translation.vector);
    let v_cam = rot_inv * point_velocity_world;
    let (r_hat, rate) = motion_field(&cam, &sample.ego(), &v_cam)?;
    Ok(SimPoint {
        world: *world,
        cam,
        range: cam.norm(),
        r_hat,
        rate,
    })
}

/// Closed-form ground truth for a stationary point: everything follows from
/// the geometry `d = r sin(alpha)`, `s = r cos(alpha)` and the speed, with
/// no flow involved.
#[derive(Debug, Clone, Copy)]
pub struct PointTruth {
    pub alpha: f64,
    pub gamma: f64,
    /// `|t| sin(alpha) / r`, the de-rotated alpha rate.
    pub alpha_dot: f64,
    /// `d / |t|`, s.
    pub tc: f64,
    /// `s / |t|`, s (signed).
    pub ttc: f64,
    /// Distance from the translation axis, m.
    pub d: f64,
    /// Distance ahead along the heading, m (signed).
    pub s: f64,
    pub range: f64,
}

pub fn stationary_point_truth(p_cam: &Vector3, frame: &TranslationFrame) -> Result<PointTruth> {
    let range = p_cam.norm();
    if range < 1e-9 {
        return Err(Error::DegeneratePoint { range });
    }
    let ag = frame.alpha_gamma(&UnitVector3::new_unchecked(p_cam / range));
    let (sa, ca) = ag.alpha.sin_cos();
    let d = range * sa;
    let s = range * ca;
    Ok(PointTruth {
        alpha: ag.alpha,
        gamma: ag.gamma,
        alpha_dot: frame.speed * sa / range,
        tc: d / frame.speed,
        ttc: s / frame.speed,
        d,
        s,
        range,
    })
}

/// Invariants of a single point measured through the flow route: analytic
/// motion field, de-rotation, then the alpha-rate and TC/TTC formulas.
///
/// This is the measurement the dense pipeline produces, evaluated exactly
/// at one point; for stationary points it must agree with
/// [`stationary_point_truth`]. No degeneracy masking is applied, so the
/// caller is responsible for keeping the point off the heading axis.
#[derive(Debug, Clone, Copy)]
pub struct PointMeasurement {
    pub angles: AlphaGamma,
    pub alpha_dot: f64,
    pub residual: f64,
    pub tc: f64,
    pub ttc: f64,
}

pub fn point_measurement(
    p_cam: &Vector3,
    ego: &EgoMotion,
    point_velocity: &Vector3,
) -> Result<PointMeasurement> {
    let frame = TranslationFrame::from_translation(&ego.t)?;
    let (r_hat, rate) = motion_field(p_cam, ego, point_velocity)?;
    let derotated = rate - rotational_component(&ego.omega, &r_hat);
    let (alpha, alpha_dot, residual) = alpha_rate_at(&frame, &r_hat, &derotated);
    let gamma = frame.alpha_gamma(&r_hat).gamma;
    let (sa, ca) = alpha.sin_cos();
    Ok(PointMeasurement {
        angles: AlphaGamma { alpha, gamma },
        alpha_dot,
        residual,
        tc: sa * sa / alpha_dot,
        ttc: sa * ca / alpha_dot,
    })
}

/// Per-pixel ground-truth fields of a rendered frame.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub alpha: Vec<f64>,
    pub alpha_dot: Vec<f64>,
    pub tc: Vec<f64>,
    pub ttc: Vec<f64>,
    pub valid: Vec<bool>,
}

/// A rendered frame: depth, image flow, and ground truth, all mutually
/// consistent at every covered pixel.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub index: usize,
    pub time: f64,
    pub intrinsics: crate::geometry::CameraIntrinsics,
    pub ego: EgoMotion,
    pub flow: crate::derotation::FlowField,
    /// Range along the pixel ray, m; infinite where nothing is hit.
    pub depth: Vec<f64>,
    pub covered: Vec<bool>,
    pub truth: GroundTruth,
}

/// How image flow is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    /// Instantaneous analytic rate times `frame_dt`. Exact.
    Analytic,
    /// Re-project each surface point through the next pose and subtract,
    /// like a real two-frame flow estimate. Carries discretization error;
    /// the last frame of a sequence falls back to analytic flow.
    TwoFrame,
}

/// Seeded flow perturbation: one magnitude factor `N(1, sigma_mult)` per
/// pixel plus isotropic additive noise in pixels.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub sigma_mult: f64,
    pub sigma_add_px: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub frame_dt: f64,
    pub flow_mode: FlowMode,
    pub noise: Option<NoiseModel>,
    pub seed: u64,
    /// Axis mask passed through to the ground-truth validity, so oracle and
    /// pipeline mask the same pixels.
    pub eps_axis: f64,
    pub eps_rate: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            frame_dt: 0.1,
            flow_mode: FlowMode::Analytic,
            noise: None,
            seed: 0,
            eps_axis: crate::derotation::eps_axis_default(),
            eps_rate: crate::invariants::EPS_RATE_DEFAULT,
        }
    }
}
