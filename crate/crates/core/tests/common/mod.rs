//! Shared scenes, trajectories, and the full-pipeline runner used by the
//! integration and acceptance suites.
#![allow(dead_code)]

use flowvariants::derotation::{alpha_rate, derotate, eps_axis_default, image_flow_to_spherical};
use flowvariants::geometry::{CameraIntrinsics, DirectionGrid, TranslationFrame, Vector3};
use flowvariants::invariants::{compute_invariants, EPS_RATE_DEFAULT};
use flowvariants::sim::{
    constant_world_velocity_trajectory, Pose, ScenePrimitive, Shape, SyntheticFrame,
    TrajectorySample,
};
use flowvariants::{AlphaField, InvariantField};

pub fn test_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(150.0, 150.0, 128.0, 96.0, 256, 192)
}

/// A 2x1x1 m box 10 m ahead, slightly off axis.
pub fn box_scene() -> Vec<ScenePrimitive> {
    vec![ScenePrimitive::stationary_box(
        Vector3::new(0.8, -0.3, 10.0),
        Vector3::new(2.0, 1.0, 1.0),
    )]
}

/// Ground plane 1.5 m below the camera.
pub fn ground_scene() -> Vec<ScenePrimitive> {
    vec![ScenePrimitive::ground_plane(1.5, [200.0, 200.0])]
}

/// A grid of points on a vertical facade 12 m ahead.
pub fn facade_points_scene() -> Vec<ScenePrimitive> {
    let mut points = Vec::new();
    for i in -4..=4 {
        for j in -3..=3 {
            points.push(Vector3::new(
                i as f64 * 0.7 + 0.1,
                j as f64 * 0.5 - 0.2,
                12.0,
            ));
        }
    }
    vec![ScenePrimitive::point_set(points)]
}

/// Forward translation with a small lateral drift and a gentle 3-axis
/// rotation; exact at every sample.
pub fn turning_trajectory(dt: f64, count: usize) -> Vec<TrajectorySample> {
    constant_world_velocity_trajectory(
        Pose::identity(),
        Vector3::new(0.2, -0.1, 2.0),
        Vector3::new(0.02, 0.05, 0.01),
        dt,
        count,
    )
}

pub fn straight_trajectory(speed: f64, dt: f64, count: usize) -> Vec<TrajectorySample> {
    constant_world_velocity_trajectory(
        Pose::identity(),
        Vector3::new(0.0, 0.0, speed),
        Vector3::zeros(),
        dt,
        count,
    )
}

/// Everything the dense pipeline produces for one synthetic frame.
pub struct PipelineRun {
    pub grid: DirectionGrid,
    pub frame: TranslationFrame,
    pub alpha: AlphaField,
    pub invariants: InvariantField,
}

/// Runs flow -> sphere -> de-rotation -> alpha rate -> invariants with the
/// default masks, consuming only the frame's image flow and ego-motion.
pub fn run_pipeline(frame: &SyntheticFrame) -> PipelineRun {
    let grid = DirectionGrid::new(&frame.intrinsics);
    let spherical = image_flow_to_spherical(&frame.intrinsics, &frame.flow).unwrap();
    let derotated = derotate(&spherical, &frame.ego.omega, &grid).unwrap();
    let tf = TranslationFrame::from_translation(&frame.ego.t).unwrap();
    let alpha = alpha_rate(&tf, &grid, &derotated, eps_axis_default()).unwrap();
    let invariants = compute_invariants(&alpha, EPS_RATE_DEFAULT);
    PipelineRun {
        grid,
        frame: tf,
        alpha,
        invariants,
    }
}

/// World-frame corners of an axis-aligned box primitive.
pub fn box_corners(prim: &ScenePrimitive) -> Vec<Vector3> {
    let Shape::Box { size } = &prim.shape else {
        panic!("not a box")
    };
    let h = size * 0.5;
    let mut corners = Vec::new();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                let local = Vector3::new(sx * h.x, sy * h.y, sz * h.z);
                corners.push(prim.pose.rotation * local + prim.pose.translation.vector);
            }
        }
    }
    corners
}
