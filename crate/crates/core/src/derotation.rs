//! Lifts image-plane flow onto the viewing sphere, removes the rotational
//! component of camera motion, and extracts the per-pixel `alpha` rate.
//!
//! After de-rotation the flow of a stationary point is purely radial about
//! the focus of expansion: it lies in the plane spanned by the heading and
//! the line of sight. The component outside that plane is reported per pixel
//! as `residual`; it vanishes for exact stationary-world flow and flags
//! noise or independently moving objects.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DirectionGrid, TranslationFrame, UnitVector3, Vector3};

/// Flow components at or above this magnitude (px) mark a pixel with no
/// measurement, following the Middlebury convention.
pub const FLOW_UNKNOWN_THRESHOLD: f64 = 1e9;

/// Sentinel written for pixels with no flow measurement.
pub const FLOW_UNKNOWN: f64 = 1e10;

/// Default mask radius around the heading axis: 0.5 degrees. Near the axis
/// both `sin(alpha)` and the alpha rate vanish and their quotient is
/// numerically hopeless, so those pixels are masked rather than extrapolated.
pub fn eps_axis_default() -> f64 {
    0.5_f64.to_radians()
}

/// Dense image-plane optical flow in px/frame.
#[derive(Debug, Clone)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    /// Seconds spanned by one frame of flow.
    pub frame_dt: f64,
    /// Row-major `(du, dv)` per pixel.
    pub flow: Vec<[f64; 2]>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, frame_dt: f64) -> Self {
        assert!(frame_dt > 0.0, "frame_dt must be positive");
        Self {
            width,
            height,
            frame_dt,
            flow: vec![[0.0, 0.0]; width * height],
        }
    }

    /// True when the pixel carries no usable measurement.
    #[inline]
    pub fn missing(&self, idx: usize) -> bool {
        let [du, dv] = self.flow[idx];
        !du.is_finite()
            || !dv.is_finite()
            || du.abs() >= FLOW_UNKNOWN_THRESHOLD
            || dv.abs() >= FLOW_UNKNOWN_THRESHOLD
    }
}

/// Instantaneous camera ego-motion in the camera frame.
#[derive(Debug, Clone, Copy)]
pub struct EgoMotion {
    /// Translation velocity, m/s.
    pub t: Vector3,
    /// Angular rate, rad/s.
    pub omega: Vector3,
}

/// Flow on the viewing sphere: per-pixel tangent rate of the unit line of
/// sight, rad/s. Tangency `rate . r_hat = 0` holds at every pixel.
#[derive(Debug, Clone)]
pub struct SphericalFlow {
    pub width: usize,
    pub height: usize,
    pub rates: Vec<Vector3>,
    /// False where the source flow was missing.
    pub known: Vec<bool>,
}

/// Per-pixel `alpha`, its rate, and the off-plane residual.
#[derive(Debug, Clone)]
pub struct AlphaField {
    pub width: usize,
    pub height: usize,
    /// Angle to the heading, rad.
    pub alpha: Vec<f64>,
    /// Rate of `alpha`, rad/s. Zero where not valid.
    pub alpha_dot: Vec<f64>,
    /// Magnitude of the de-rotated flow outside the alpha plane, rad/s.
    pub residual: Vec<f64>,
    pub valid: Vec<bool>,
}

fn check_dims(ew: usize, eh: usize, gw: usize, gh: usize) -> Result<()> {
    if (ew, eh) != (gw, gh) {
        return Err(Error::DimensionMismatch {
            expected_width: ew,
            expected_height: eh,
            got_width: gw,
            got_height: gh,
        });
    }
    Ok(())
}

/// Converts image-plane flow to spherical flow through the analytic Jacobian
/// of the pixel-to-direction map.
///
/// Frame-difference flow is divided by `frame_dt`, so the output is a rate.
pub fn image_flow_to_spherical(intr: &CameraIntrinsics, flow: &FlowField) -> Result<SphericalFlow> {
    check_dims(intr.width, intr.height, flow.width, flow.height)?;
    let (w, h) = (flow.width, flow.height);
    let inv_dt = 1.0 / flow.frame_dt;
    let mut rates = vec![Vector3::zeros(); w * h];
    let mut known = vec![false; w * h];

    rates
        .par_chunks_mut(w)
        .zip(known.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (rate_row, known_row))| {
            let q = (y as f64 - intr.cy) / intr.fy;
            for x in 0..w {
                let idx = y * w + x;
                if flow.missing(idx) {
                    continue;
                }
                let p = (x as f64 - intr.cx) / intr.fx;
                let n2 = p * p + q * q + 1.0;
                let n = n2.sqrt();
                let inv_n = 1.0 / n;
                let inv_n3 = inv_n / n2;
                // Columns of the Jacobian of normalize((u-cx)/fx, (v-cy)/fy, 1).
                let g = Vector3::new(p, q, 1.0);
                let col_u = (Vector3::new(inv_n, 0.0, 0.0) - g * (p * inv_n3)) / intr.fx;
                let col_v = (Vector3::new(0.0, inv_n, 0.0) - g * (q * inv_n3)) / intr.fy;
                let [du, dv] = flow.flow[idx];
                rate_row[x] = col_u * (du * inv_dt) + col_v * (dv * inv_dt);
                known_row[x] = true;
            }
        });

    Ok(SphericalFlow {
        width: w,
        height: h,
        rates,
        known,
    })
}

/// Rotational part of the spherical motion field of a stationary point:
/// `-omega x r_hat`. Depth-independent and always tangent to the sphere.
#[inline]
pub fn rotational_component(omega: &Vector3, r_hat: &UnitVector3) -> Vector3 {
    -omega.cross(r_hat)
}

/// Subtracts the rotational component, leaving the pure-translation field.
///
/// For a stationary scene the result moves radially away from the focus of
/// expansion (or toward the focus of convergence).
pub fn derotate(
    spherical: &SphericalFlow,
    omega: &Vector3,
    grid: &DirectionGrid,
) -> Result<SphericalFlow> {
    check_dims(spherical.width, spherical.height, grid.width, grid.height)?;
    let w = spherical.width;
    let mut rates = vec![Vector3::zeros(); spherical.rates.len()];
    rates
        .par_chunks_mut(w)
        .zip(spherical.rates.par_chunks(w))
        .zip(grid.dirs().par_chunks(w))
        .zip(spherical.known.par_chunks(w))
        .for_each(|(((out, rate), dirs), known)| {
            for x in 0..w {
                if known[x] {
                    // rate - (-omega x r_hat)
                    out[x] = rate[x] + omega.cross(&dirs[x]);
                }
            }
        });
    Ok(SphericalFlow {
        width: spherical.width,
        height: spherical.height,
        rates,
        known: spherical.known.clone(),
    })
}

/// Scalar kernel of [`alpha_rate`]: `alpha`, its rate, and the off-plane
/// residual for one de-rotated sight line.
///
/// The in-plane tangent of increasing `alpha` is
/// `(cos(alpha) r_hat - t_hat) / sin(alpha)`, so
/// `alpha_dot = -(t_hat . rate) / sin(alpha)`.
pub fn alpha_rate_at(
    frame: &TranslationFrame,
    r_hat: &UnitVector3,
    derotated_rate: &Vector3,
) -> (f64, f64, f64) {
    let ct = frame.t_hat.dot(r_hat).clamp(-1.0, 1.0);
    let alpha = ct.acos();
    let sin_alpha = alpha.sin();
    let alpha_dot = -frame.t_hat.dot(derotated_rate) / sin_alpha;
    let a_hat = (ct * r_hat.into_inner() - frame.t_hat.into_inner()) / sin_alpha;
    let residual = (derotated_rate - alpha_dot * a_hat).norm();
    (alpha, alpha_dot, residual)
}

/// Extracts the per-pixel `alpha` field from de-rotated spherical flow.
///
/// Pixels within `eps_axis` of the heading axis (where `sin(alpha)` is below
/// the threshold) and pixels with missing flow are masked, never NaN.
pub fn alpha_rate(
    frame: &TranslationFrame,
    grid: &DirectionGrid,
    derotated: &SphericalFlow,
    eps_axis: f64,
) -> Result<AlphaField> {
    check_dims(derotated.width, derotated.height, grid.width, grid.height)?;
    let (w, h) = (derotated.width, derotated.height);
    let n = w * h;
    let sin_min = eps_axis.sin();
    let mut alpha = vec![0.0; n];
    let mut alpha_dot = vec![0.0; n];
    let mut residual = vec![0.0; n];
    let mut valid = vec![false; n];

    alpha
        .par_chunks_mut(w)
        .zip(alpha_dot.par_chunks_mut(w))
        .zip(residual.par_chunks_mut(w))
        .zip(valid.par_chunks_mut(w))
        .zip(derotated.rates.par_chunks(w))
        .zip(derotated.known.par_chunks(w))
        .zip(grid.dirs().par_chunks(w))
        .for_each(
            |((((((a_row, ad_row), res_row), v_row), rates), known), dirs)| {
                for x in 0..w {
                    let r_hat = UnitVector3::new_unchecked(dirs[x]);
                    let ct = frame.t_hat.dot(&r_hat).clamp(-1.0, 1.0);
                    let a = ct.acos();
                    a_row[x] = a;
                    let sa = a.sin();
                    if !known[x] || sa < sin_min {
                        continue;
                    }
                    let rate = &rates[x];
                    let ad = -frame.t_hat.dot(rate) / sa;
                    let a_hat = (ct * r_hat.into_inner() - frame.t_hat.into_inner()) / sa;
                    ad_row[x] = ad;
                    res_row[x] = (rate - ad * a_hat).norm();
                    v_row[x] = true;
                }
            },
        );

    Ok(AlphaField {
        width: w,
        height: h,
        alpha,
        alpha_dot,
        residual,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn small_intr() -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 50.0, 50.0, 101, 101)
    }

    #[test]
    fn zero_flow_maps_to_zero_spherical_flow() {
        let intr = small_intr();
        let flow = FlowField::new(intr.width, intr.height, 0.1);
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        assert!(sph.rates.iter().all(|r| r.norm() == 0.0));
        assert!(sph.known.iter().all(|&k| k));
    }

    #[test]
    fn principal_point_small_angle_flow() {
        let intr = small_intr();
        let delta = 1e-4;
        let mut flow = FlowField::new(intr.width, intr.height, 1.0);
        let idx = 50 * intr.width + 50;
        flow.flow[idx] = [intr.fx * delta, 0.0];
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        let expect = Vector3::new(delta, 0.0, 0.0);
        assert!((sph.rates[idx] - expect).norm() < 1e-8);
    }

    #[test]
    fn spherical_flow_is_tangent() {
        let intr = small_intr();
        let grid = DirectionGrid::new(&intr);
        let mut flow = FlowField::new(intr.width, intr.height, 0.25);
        for (i, f) in flow.flow.iter_mut().enumerate() {
            f[0] = ((i % 17) as f64 - 8.0) * 0.3;
            f[1] = ((i % 11) as f64 - 5.0) * 0.2;
        }
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        for y in 0..intr.height {
            for x in 0..intr.width {
                let idx = y * intr.width + x;
                assert!(sph.rates[idx].dot(grid.dir(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn missing_flow_is_masked_through_the_chain() {
        let intr = small_intr();
        let grid = DirectionGrid::new(&intr);
        let mut flow = FlowField::new(intr.width, intr.height, 0.1);
        flow.flow[7] = [FLOW_UNKNOWN, FLOW_UNKNOWN];
        flow.flow[8] = [f64::NAN, 0.0];
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        assert!(!sph.known[7] && !sph.known[8]);
        let derot = derotate(&sph, &Vector3::new(0.0, 0.1, 0.0), &grid).unwrap();
        assert!(!derot.known[7]);
        assert_eq!(derot.rates[7], Vector3::zeros());
        let frame = TranslationFrame::from_translation(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let af = alpha_rate(&frame, &grid, &derot, eps_axis_default()).unwrap();
        assert!(!af.valid[7] && !af.valid[8]);
        assert!(af.alpha_dot[7] == 0.0 && af.residual[7] == 0.0);
    }

    #[test]
    fn rotational_component_hand_cases() {
        let r_hat = UnitVector3::new_normalize(Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(
            rotational_component(&Vector3::zeros(), &r_hat),
            Vector3::zeros()
        );
        let got = rotational_component(&Vector3::new(0.0, 1.0, 0.0), &r_hat);
        assert_relative_eq!(got, Vector3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn derotation_with_zero_omega_is_identity() {
        let intr = small_intr();
        let grid = DirectionGrid::new(&intr);
        let mut flow = FlowField::new(intr.width, intr.height, 0.1);
        for (i, f) in flow.flow.iter_mut().enumerate() {
            f[0] = (i % 5) as f64 * 0.1;
            f[1] = (i % 3) as f64 * 0.1;
        }
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        let derot = derotate(&sph, &Vector3::zeros(), &grid).unwrap();
        for (a, b) in sph.rates.iter().zip(&derot.rates) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn alpha_rate_zero_flow_gives_zero_rate_and_residual() {
        let intr = small_intr();
        let grid = DirectionGrid::new(&intr);
        let flow = FlowField::new(intr.width, intr.height, 0.1);
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        let frame = TranslationFrame::from_translation(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        let af = alpha_rate(&frame, &grid, &sph, eps_axis_default()).unwrap();
        for i in 0..af.alpha.len() {
            if af.valid[i] {
                assert_eq!(af.alpha_dot[i], 0.0);
                assert_eq!(af.residual[i], 0.0);
            }
        }
    }

    #[test]
    fn near_axis_pixels_are_masked() {
        let intr = small_intr();
        let grid = DirectionGrid::new(&intr);
        let flow = FlowField::new(intr.width, intr.height, 0.1);
        let sph = image_flow_to_spherical(&intr, &flow).unwrap();
        // Heading along the optical axis: the FOE sits at the principal point.
        let frame = TranslationFrame::from_translation(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        let af = alpha_rate(&frame, &grid, &sph, eps_axis_default()).unwrap();
        let foe = 50 * intr.width + 50;
        assert!(!af.valid[foe]);
        // A pixel 10 px away is ~5.7 degrees off axis and stays valid.
        assert!(af.valid[foe + 10]);
    }

    #[test]
    fn stationary_point_alpha_rate_matches_geometry() {
        // Point at range 10 m, alpha = 30 deg, speed 2 m/s:
        // alpha_dot = |t| sin^2(alpha) / d with d = r sin(alpha) = 5 m.
        let frame = TranslationFrame::from_translation(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        let ag = crate::geometry::AlphaGamma {
            alpha: 30.0_f64.to_radians(),
            gamma: 1.1,
        };
        let r_hat = frame.direction(&ag);
        // Pure-translation motion field of a stationary point at range 10.
        let p_dot = -frame.t_hat.into_inner() * frame.speed;
        let rate = (p_dot - p_dot.dot(&r_hat) * r_hat.into_inner()) / 10.0;
        let (alpha, alpha_dot, residual) = alpha_rate_at(&frame, &r_hat, &rate);
        assert_relative_eq!(alpha, 30.0_f64.to_radians(), epsilon = 1e-12);
        assert_relative_eq!(alpha_dot, 0.1, epsilon = 1e-12);
        assert!(residual < 1e-12);
    }

    proptest! {
        #[test]
        fn derotation_is_additive_in_omega(
            w1x in -0.5..0.5f64, w1y in -0.5..0.5f64, w1z in -0.5..0.5f64,
            w2x in -0.5..0.5f64, w2y in -0.5..0.5f64, w2z in -0.5..0.5f64,
            seed in 0u64..1000,
        ) {
            let intr = CameraIntrinsics::new(60.0, 60.0, 16.0, 12.0, 32, 24);
            let grid = DirectionGrid::new(&intr);
            let mut flow = FlowField::new(intr.width, intr.height, 0.5);
            let mut s = seed;
            for f in flow.flow.iter_mut() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f[0] = ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 4.0;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f[1] = ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 4.0;
            }
            let sph = image_flow_to_spherical(&intr, &flow).unwrap();
            let o1 = Vector3::new(w1x, w1y, w1z);
            let o2 = Vector3::new(w2x, w2y, w2z);
            let combined = derotate(&sph, &(o1 + o2), &grid).unwrap();
            let sequential = derotate(&derotate(&sph, &o1, &grid).unwrap(), &o2, &grid).unwrap();
            for (a, b) in combined.rates.iter().zip(&sequential.rates) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
