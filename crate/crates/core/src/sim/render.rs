//! Pixel-parallel ray casting and ground-truth synthesis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::derotation::{FlowField, FLOW_UNKNOWN};
use crate::geometry::{CameraIntrinsics, DirectionGrid, TranslationFrame, Vector3};

use super::{
    motion_field, stationary_point_truth, FlowMode, GroundTruth, RenderOptions, ScenePrimitive,
    Shape, SyntheticFrame, TrajectorySample,
};

const RAY_EPS: f64 = 1e-9;
const SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

/// Smallest positive hit distance of a ray against an axis-aligned box of
/// the given half extents, in the box's local frame.
fn ray_box(origin: &Vector3, dir: &Vector3, half: &Vector3) -> Option<f64> {
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for axis in 0..3 {
        let o = origin[axis];
        let d = dir[axis];
        let h = half[axis];
        if d.abs() < 1e-15 {
            if o.abs() > h {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (t0, t1) = {
            let a = (-h - o) * inv;
            let b = (h - o) * inv;
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        };
        t_min = t_min.max(t0);
        t_max = t_max.min(t1);
        if t_min > t_max {
            return None;
        }
    }
    if t_min > RAY_EPS {
        Some(t_min)
    } else if t_max > RAY_EPS {
        Some(t_max)
    } else {
        None
    }
}

/// Hit distance of a ray against the rectangle |x| <= hx, |y| <= hy in the
/// local z = 0 plane.
fn ray_rect(origin: &Vector3, dir: &Vector3, hx: f64, hy: f64) -> Option<f64> {
    if dir.z.abs() < 1e-15 {
        return None;
    }
    let t = -origin.z / dir.z;
    if t <= RAY_EPS {
        return None;
    }
    let x = origin.x + t * dir.x;
    let y = origin.y + t * dir.y;
    if x.abs() <= hx && y.abs() <= hy {
        Some(t)
    } else {
        None
    }
}

struct LocalPrimitive {
    rot_inv: nalgebra::UnitQuaternion<f64>,
    /// Camera position in the primitive's local frame.
    local_origin: Vector3,
    /// Primitive velocity in the camera frame, m/s.
    velocity_cam: Vector3,
    stationary: bool,
}

/// Renders one frame: depth by nearest hit, image flow per covered pixel,
/// and ground-truth invariants.
///
/// Point-set primitives are splatted to the nearest pixel and snapped onto
/// that pixel's center ray at their true range, so pixel-sampled flow and
/// ground truth stay mutually consistent. `next` supplies the following
/// pose for two-frame flow; without it the frame falls back to analytic
/// flow.
pub fn render_frame(
    scene: &[ScenePrimitive],
    sample: &TrajectorySample,
    next: Option<&TrajectorySample>,
    grid: &DirectionGrid,
    intr: &CameraIntrinsics,
    opts: &RenderOptions,
    index: usize,
) -> SyntheticFrame {
    assert!(!scene.is_empty(), "scene needs at least one primitive");
    let (w, h) = (intr.width, intr.height);
    let n = w * h;
    let cam_rot = sample.pose.rotation;
    let cam_rot_inv = cam_rot.inverse();
    let cam_pos = sample.pose.translation.vector;

    let locals: Vec<LocalPrimitive> = scene
        .iter()
        .map(|p| {
            let rot_inv = p.pose.rotation.inverse();
            LocalPrimitive {
                rot_inv,
                local_origin: rot_inv * (cam_pos - p.pose.translation.vector),
                velocity_cam: cam_rot_inv * p.velocity,
                stationary: p.is_stationary(),
            }
        })
        .collect();

    // Nearest hit per pixel: range along the unit pixel ray plus the index
    // of the primitive that was hit.
    let mut depth = vec![f64::INFINITY; n];
    let mut hit = vec![-1i32; n];
    depth
        .par_chunks_mut(w)
        .zip(hit.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (depth_row, hit_row))| {
            for x in 0..w {
                let dir_w = cam_rot * grid.dir(x, y);
                for (pi, (prim, local)) in scene.iter().zip(&locals).enumerate() {
                    let dir_l = local.rot_inv * dir_w;
                    let range = match &prim.shape {
                        Shape::Box { size } => ray_box(&local.local_origin, &dir_l, &(size * 0.5)),
                        Shape::Plane { extent } => ray_rect(
                            &local.local_origin,
                            &dir_l,
                            extent[0] * 0.5,
                            extent[1] * 0.5,
                        ),
                        Shape::PointSet { .. } => None,
                    };
                    if let Some(r) = range {
                        if r < depth_row[x] {
                            depth_row[x] = r;
                            hit_row[x] = pi as i32;
                        }
                    }
                }
            }
        });

    // Splat point sets, nearest range wins.
    for (pi, prim) in scene.iter().enumerate() {
        let Shape::PointSet { points } = &prim.shape else {
            continue;
        };
        for p_local in points {
            let world = prim.pose.rotation * p_local + prim.pose.translation.vector;
            let cam = cam_rot_inv * (world - cam_pos);
            if cam.z <= RAY_EPS {
                continue;
            }
            let (u, v) = intr.direction_to_pixel(&cam);
            let (ux, vy) = (u.round(), v.round());
            if ux < 0.0 || vy < 0.0 || ux >= w as f64 || vy >= h as f64 {
                continue;
            }
            let idx = vy as usize * w + ux as usize;
            let range = cam.norm();
            if range < depth[idx] {
                depth[idx] = range;
                hit[idx] = pi as i32;
            }
        }
    }

    let covered: Vec<bool> = hit.iter().map(|&i| i >= 0).collect();
    let ego = sample.ego();
    let frame = TranslationFrame::from_translation(&ego.t).ok();

    // Flow and ground truth per covered pixel.
    let two_frame = opts.flow_mode == FlowMode::TwoFrame && next.is_some();
    let frame_dt = if two_frame {
        next.unwrap().time - sample.time
    } else {
        opts.frame_dt
    };
    assert!(frame_dt > 0.0, "non-increasing trajectory timestamps");

    let mut flow = FlowField::new(w, h, frame_dt);
    let mut truth = GroundTruth {
        alpha: vec![0.0; n],
        alpha_dot: vec![0.0; n],
        tc: vec![0.0; n],
        ttc: vec![0.0; n],
        valid: vec![false; n],
    };
    let sin_min = opts.eps_axis.sin();

    flow.flow
        .par_chunks_mut(w)
        .zip(truth.alpha.par_chunks_mut(w))
        .zip(truth.alpha_dot.par_chunks_mut(w))
        .zip(truth.tc.par_chunks_mut(w))
        .zip(truth.ttc.par_chunks_mut(w))
        .zip(truth.valid.par_chunks_mut(w))
        .enumerate()
        .for_each(
            |(y, (((((flow_row, a_row), ad_row), tc_row), ttc_row), v_row))| {
                for x in 0..w {
                    let idx = y * w + x;
                    if hit[idx] < 0 {
                        flow_row[x] = [FLOW_UNKNOWN, FLOW_UNKNOWN];
                        continue;
                    }
                    let local = &locals[hit[idx] as usize];
                    let prim = &scene[hit[idx] as usize];
                    let r_hat_px = grid.dir(x, y);
                    let p_cam = r_hat_px * depth[idx];

                    // Image flow.
                    if two_frame {
                        let nxt = next.unwrap();
                        let world = cam_rot * p_cam + cam_pos;
                        let world2 = world + prim.velocity * frame_dt;
                        let cam2 =
                            nxt.pose.rotation.inverse() * (world2 - nxt.pose.translation.vector);
                        if cam2.z > RAY_EPS {
                            let (u2, v2) = intr.direction_to_pixel(&cam2);
                            flow_row[x] = [u2 - x as f64, v2 - y as f64];
                        } else {
                            flow_row[x] = [FLOW_UNKNOWN, FLOW_UNKNOWN];
                        }
                    } else {
                        let (r_hat, rate) =
                            motion_field(&p_cam, &ego, &local.velocity_cam).expect("range > 0");
                        let (du, dv) = intr.projected_pixel_rate(&r_hat, &rate);
                        flow_row[x] = [du * frame_dt, dv * frame_dt];
                    }

                    // Ground truth. Without translation there are no invariants.
                    let Some(frame) = &frame else { continue };
                    if local.stationary {
                        let truth_pt = stationary_point_truth(&p_cam, frame).expect("range > 0");
                        a_row[x] = truth_pt.alpha;
                        if truth_pt.alpha.sin() < sin_min
                            || truth_pt.alpha_dot.abs() < opts.eps_rate
                        {
                            continue;
                        }
                        ad_row[x] = truth_pt.alpha_dot;
                        tc_row[x] = truth_pt.tc;
                        ttc_row[x] = truth_pt.ttc;
                        v_row[x] = true;
                    } else {
                        // Movers have no geometric truth; the reference is the
                        // kinematic route through the analytic motion field.
                        let m = super::point_measurement(&p_cam, &ego, &local.velocity_cam)
                            .expect("range > 0 and speed > 0");
                        a_row[x] = m.angles.alpha;
                        if m.angles.alpha.sin() < sin_min || m.alpha_dot.abs() < opts.eps_rate {
                            continue;
                        }
                        ad_row[x] = m.alpha_dot;
                        tc_row[x] = m.tc;
                        ttc_row[x] = m.ttc;
                        v_row[x] = true;
                    }
                }
            },
        );

    if let Some(noise) = &opts.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed
                .wrapping_add((index as u64).wrapping_mul(SEED_MIX)),
        );
        for (idx, f) in flow.flow.iter_mut().enumerate() {
            if !covered[idx] || f[0].abs() >= FLOW_UNKNOWN {
                continue;
            }
            let scale: f64 = 1.0 + noise.sigma_mult * rng.sample::<f64, _>(StandardNormal);
            let add_u: f64 = noise.sigma_add_px * rng.sample::<f64, _>(StandardNormal);
            let add_v: f64 = noise.sigma_add_px * rng.sample::<f64, _>(StandardNormal);
            f[0] = f[0] * scale + add_u;
            f[1] = f[1] * scale + add_v;
        }
    }

    SyntheticFrame {
        index,
        time: sample.time,
        intrinsics: *intr,
        ego,
        flow,
        depth,
        covered,
        truth,
    }
}

/// Renders one frame per trajectory sample. Deterministic for a fixed seed;
/// frames are independent and rendered in parallel row-wise.
pub fn generate_sequence(
    scene: &[ScenePrimitive],
    trajectory: &[TrajectorySample],
    intr: &CameraIntrinsics,
    opts: &RenderOptions,
) -> Vec<SyntheticFrame> {
    assert!(
        !trajectory.is_empty(),
        "trajectory needs at least one sample"
    );
    let grid = DirectionGrid::new(intr);
    trajectory
        .iter()
        .enumerate()
        .map(|(k, sample)| render_frame(scene, sample, trajectory.get(k + 1), &grid, intr, opts, k))
        .collect()
}
