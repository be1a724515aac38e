//! Camera model, viewing-sphere directions, and the coordinate frame anchored
//! to the instantaneous translation vector.
//!
//! Every downstream quantity is expressed against the [`TranslationFrame`]:
//! `alpha` is the angle between the heading `t̂` and the line of sight `r̂`,
//! `gamma` is the azimuth of the line of sight about `t̂`. The pixel grid is
//! bridged to the sphere by a plain pinhole model (rectified imagery, no
//! distortion).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 3D vector in the camera frame (meters, m/s, or rad/s depending on role).
pub type Vector3 = nalgebra::Vector3<f64>;
/// Unit-norm 3D direction.
pub type UnitVector3 = nalgebra::Unit<Vector3>;

/// Tolerance for unit-norm and orthonormality invariants.
pub const UNIT_TOL: f64 = 1e-12;

/// Below this value of `sin(alpha)` the azimuth is numerically meaningless
/// and is pinned to zero by convention.
const GAMMA_AXIS_SING: f64 = 1e-9;

/// Camera up axis used as the `gamma = 0` reference (image rows grow
/// downward, so up is -y).
const CAMERA_UP: Vector3 = Vector3::new(0.0, -1.0, 0.0);

/// Fallback reference axis when the heading is within ~2.5 degrees of the
/// camera up axis.
const UP_FALLBACK: Vector3 = Vector3::new(1.0, 0.0, 0.0);

/// Pinhole intrinsics for a rectified image. The camera looks along +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Focal length in pixels, horizontal.
    pub fx: f64,
    /// Focal length in pixels, vertical.
    pub fy: f64,
    /// Principal point, horizontal (px).
    pub cx: f64,
    /// Principal point, vertical (px).
    pub cy: f64,
    /// Image width in pixels.
    pub width: usize,
    /// Image height in pixels.
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Self {
        assert!(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
        assert!(width > 0 && height > 0, "image size must be positive");
        Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Unit viewing direction of the (sub-)pixel `(u, v)`.
    ///
    /// Returns `normalize((u - cx)/fx, (v - cy)/fy, 1)`; total on finite
    /// inputs, also for pixels outside the image bounds.
    pub fn pixel_to_direction(&self, u: f64, v: f64) -> UnitVector3 {
        UnitVector3::new_normalize(Vector3::new(
            (u - self.cx) / self.fx,
            (v - self.cy) / self.fy,
            1.0,
        ))
    }

    /// Inverse of [`pixel_to_direction`](Self::pixel_to_direction) for
    /// directions in front of the camera (z > 0).
    pub(crate) fn direction_to_pixel(&self, dir: &Vector3) -> (f64, f64) {
        let inv_z = 1.0 / dir.z;
        (
            self.cx + self.fx * dir.x * inv_z,
            self.cy + self.fy * dir.y * inv_z,
        )
    }

    /// Image-plane rate `(u̇, v̇)` of a moving unit direction.
    ///
    /// `r_hat` must be unit and `rate` tangent to the sphere at `r_hat`;
    /// this is the exact time derivative of the pinhole projection.
    pub(crate) fn projected_pixel_rate(&self, r_hat: &Vector3, rate: &Vector3) -> (f64, f64) {
        let inv_z = 1.0 / r_hat.z;
        let du = self.fx * (rate.x - r_hat.x * rate.z * inv_z) * inv_z;
        let dv = self.fy * (rate.y - r_hat.y * rate.z * inv_z) * inv_z;
        (du, dv)
    }
}

/// Direction on the viewing sphere in polar/azimuth form.
///
/// `theta` is the polar angle from the optical axis (+z), `phi` the azimuth
/// about it, measured from +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    /// Polar angle in `[0, pi]`.
    pub theta: f64,
    /// Azimuth in `(-pi, pi]`.
    pub phi: f64,
}

impl SphericalDirection {
    pub fn from_unit(dir: &UnitVector3) -> Self {
        let theta = dir.z.clamp(-1.0, 1.0).acos();
        let phi = if dir.x == 0.0 && dir.y == 0.0 {
            0.0
        } else {
            let p = dir.y.atan2(dir.x);
            if p == -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                p
            }
        };
        Self { theta, phi }
    }

    pub fn to_unit(&self) -> UnitVector3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        UnitVector3::new_normalize(Vector3::new(st * cp, st * sp, ct))
    }
}

/// Angles of a line of sight relative to a [`TranslationFrame`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGamma {
    /// Angle between the heading and the line of sight, in `[0, pi]`.
    pub alpha: f64,
    /// Azimuth of the line of sight about the heading, in `(-pi, pi]`,
    /// measured from `e1`. Zero by convention when the sight is on-axis.
    pub gamma: f64,
}

/// Right-handed orthonormal frame whose first axis is the instantaneous
/// direction of camera translation.
///
/// `e1` is the projection of the camera up axis onto the plane normal to
/// `t_hat` (falling back to +x when the heading is nearly vertical); `e2`
/// completes the frame as `t_hat x e1`. The choice of `e1` only fixes the
/// zero point of the azimuth label `gamma`; every invariant is independent
/// of it.
#[derive(Debug, Clone, Copy)]
pub struct TranslationFrame {
    /// Unit heading `t̂`.
    pub t_hat: UnitVector3,
    /// Azimuth reference axis, orthogonal to `t_hat`.
    pub e1: UnitVector3,
    /// Third axis, `t_hat x e1`.
    pub e2: UnitVector3,
    /// Translation speed `|t|` in m/s.
    pub speed: f64,
}

impl TranslationFrame {
    /// Builds the frame from a camera-frame translation velocity.
    ///
    /// Fails with [`Error::ZeroTranslation`] when `|t| < 1e-12`: without
    /// translation the invariants are undefined.
    pub fn from_translation(t: &Vector3) -> Result<Self> {
        let speed = t.norm();
        if speed < 1e-12 {
            return Err(Error::ZeroTranslation { speed, min: 1e-12 });
        }
        let t_hat = UnitVector3::new_unchecked(t / speed);
        let up = if t_hat.dot(&CAMERA_UP).abs() > 0.999 {
            UP_FALLBACK
        } else {
            CAMERA_UP
        };
        let e1 = UnitVector3::new_normalize(up - t_hat.dot(&up) * t_hat.into_inner());
        let e2 = UnitVector3::new_unchecked(t_hat.cross(&e1));
        Ok(Self {
            t_hat,
            e1,
            e2,
            speed,
        })
    }

    /// Assembles a frame from an explicit orthonormal basis.
    ///
    /// Panics unless the basis is right-handed orthonormal within
    /// [`UNIT_TOL`]; intended for tests and for frames transported by a
    /// known rotation.
    pub fn from_parts(t_hat: UnitVector3, e1: UnitVector3, e2: UnitVector3, speed: f64) -> Self {
        debug_assert!(t_hat.dot(&e1).abs() < 1e-9, "t_hat not orthogonal to e1");
        debug_assert!(t_hat.dot(&e2).abs() < 1e-9, "t_hat not orthogonal to e2");
        debug_assert!(e1.dot(&e2).abs() < 1e-9, "e1 not orthogonal to e2");
        debug_assert!(
            (e1.cross(&e2) - t_hat.into_inner()).norm() < 1e-9,
            "basis not right-handed"
        );
        assert!(speed >= 0.0);
        Self {
            t_hat,
            e1,
            e2,
            speed,
        }
    }

    /// Polar angle `alpha` and azimuth `gamma` of a line of sight.
    pub fn alpha_gamma(&self, r_hat: &UnitVector3) -> AlphaGamma {
        let alpha = self.t_hat.dot(r_hat).clamp(-1.0, 1.0).acos();
        let gamma = if alpha.sin() < GAMMA_AXIS_SING {
            0.0
        } else {
            r_hat.dot(&self.e2).atan2(r_hat.dot(&self.e1))
        };
        AlphaGamma { alpha, gamma }
    }

    /// Line of sight reconstructed from its angles:
    /// `cos(alpha) t̂ + sin(alpha) (cos(gamma) e1 + sin(gamma) e2)`.
    pub fn direction(&self, ag: &AlphaGamma) -> UnitVector3 {
        let (sa, ca) = ag.alpha.sin_cos();
        let (sg, cg) = ag.gamma.sin_cos();
        UnitVector3::new_normalize(
            ca * self.t_hat.into_inner()
                + sa * (cg * self.e1.into_inner() + sg * self.e2.into_inner()),
        )
    }
}

/// Precomputed unit viewing direction of every pixel center.
///
/// Built once per intrinsics and shared by all per-pixel passes.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    pub width: usize,
    pub height: usize,
    dirs: Vec<Vector3>,
}

impl DirectionGrid {
    pub fn new(intr: &CameraIntrinsics) -> Self {
        let (width, height) = (intr.width, intr.height);
        let mut dirs = vec![Vector3::zeros(); width * height];
        dirs.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
            for (x, d) in row.iter_mut().enumerate() {
                *d = intr.pixel_to_direction(x as f64, y as f64).into_inner();
            }
        });
        Self {
            width,
            height,
            dirs,
        }
    }

    /// Unit direction of pixel `(x, y)` as a plain vector.
    #[inline]
    pub fn dir(&self, x: usize, y: usize) -> &Vector3 {
        &self.dirs[y * self.width + x]
    }

    #[inline]
    pub fn dirs(&self) -> &[Vector3] {
        &self.dirs
    }
}

/// Per-pixel `(alpha, gamma)` of a direction grid under a frame.
#[derive(Debug, Clone)]
pub struct AlphaGammaField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<AlphaGamma>,
}

/// Maps [`TranslationFrame::alpha_gamma`] over every pixel direction.
pub fn alpha_gamma_map(frame: &TranslationFrame, grid: &DirectionGrid) -> AlphaGammaField {
    let mut values = vec![
        AlphaGamma {
            alpha: 0.0,
            gamma: 0.0
        };
        grid.dirs.len()
    ];
    values
        .par_chunks_mut(grid.width)
        .zip(grid.dirs.par_chunks(grid.width))
        .for_each(|(out, dirs)| {
            for (o, d) in out.iter_mut().zip(dirs) {
                *o = frame.alpha_gamma(&UnitVector3::new_unchecked(*d));
            }
        });
    AlphaGammaField {
        width: grid.width,
        height: grid.height,
        values,
    }
}
