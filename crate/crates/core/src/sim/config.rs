//! Text configuration for simulated scenes and trajectories (TOML).
//!
//! ```toml
//! dt = 0.1
//! frames = 5
//! seed = 7
//!
//! [intrinsics]
//! fx = 120.0
//! fy = 120.0
//! cx = 64.0
//! cy = 48.0
//! width = 128
//! height = 96
//!
//! [camera]
//! position = [0.0, 0.0, 0.0]
//! velocity = [0.0, 0.0, 2.0]   # world frame, m/s
//! omega = [0.0, 0.05, 0.0]     # body frame, rad/s
//!
//! [[primitive]]
//! kind = "box"
//! center = [0.0, 0.0, 12.0]
//! size = [2.0, 1.0, 1.0]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Vector3};

use super::{constant_world_velocity_trajectory, Pose, ScenePrimitive, Shape, TrajectorySample};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Seconds between frames.
    pub dt: f64,
    /// Number of frames to render.
    pub frames: usize,
    #[serde(default)]
    pub seed: u64,
    pub intrinsics: CameraIntrinsics,
    pub camera: CameraConfig,
    #[serde(default, rename = "primitive")]
    pub primitives: Vec<PrimitiveConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    /// Initial position, world frame.
    #[serde(default)]
    pub position: [f64; 3],
    /// Initial attitude as a rotation vector (axis times angle, rad).
    #[serde(default)]
    pub rotation: [f64; 3],
    /// Constant world-frame velocity, m/s.
    pub velocity: [f64; 3],
    /// Constant body-frame angular rate, rad/s.
    #[serde(default)]
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Box,
    Plane,
    PointSet,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveConfig {
    pub kind: PrimitiveKind,
    #[serde(default)]
    pub center: [f64; 3],
    /// Rotation vector of the primitive pose, rad.
    #[serde(default)]
    pub rotation: [f64; 3],
    /// Full extents; planes use the first two components.
    #[serde(default = "unit_size")]
    pub size: [f64; 3],
    /// World-frame velocity, m/s.
    #[serde(default)]
    pub velocity: [f64; 3],
    /// Point coordinates for `point_set`, local frame.
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
}

fn unit_size() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

fn vec3(a: [f64; 3]) -> Vector3 {
    Vector3::new(a[0], a[1], a[2])
}

impl SceneConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SceneConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        let i = &self.intrinsics;
        if i.fx <= 0.0 || i.fy <= 0.0 || i.width == 0 || i.height == 0 {
            return Err(Error::Config(
                "intrinsics must have positive focal lengths and size".into(),
            ));
        }
        if self.primitives.is_empty() {
            return Err(Error::Config("scene needs at least one primitive".into()));
        }
        for (k, p) in self.primitives.iter().enumerate() {
            match p.kind {
                PrimitiveKind::Box if p.size.iter().any(|&s| s <= 0.0) => {
                    return Err(Error::Config(format!(
                        "primitive {k}: box size must be positive"
                    )));
                }
                PrimitiveKind::Plane if p.size[0] <= 0.0 || p.size[1] <= 0.0 => {
                    return Err(Error::Config(format!(
                        "primitive {k}: plane extent must be positive"
                    )));
                }
                PrimitiveKind::PointSet if p.points.is_empty() => {
                    return Err(Error::Config(format!(
                        "primitive {k}: point_set needs points"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn scene(&self) -> Vec<ScenePrimitive> {
        self.primitives
            .iter()
            .map(|p| {
                let rot = nalgebra::UnitQuaternion::from_scaled_axis(vec3(p.rotation));
                let pose = Pose::from_parts(vec3(p.center).into(), rot);
                let shape = match p.kind {
                    PrimitiveKind::Box => Shape::Box { size: vec3(p.size) },
                    PrimitiveKind::Plane => Shape::Plane {
                        extent: [p.size[0], p.size[1]],
                    },
                    PrimitiveKind::PointSet => Shape::PointSet {
                        points: p.points.iter().map(|&q| vec3(q)).collect(),
                    },
                };
                ScenePrimitive {
                    shape,
                    pose,
                    velocity: vec3(p.velocity),
                }
            })
            .collect()
    }

    pub fn trajectory(&self) -> Vec<TrajectorySample> {
        let rot = nalgebra::UnitQuaternion::from_scaled_axis(vec3(self.camera.rotation));
        let start = Pose::from_parts(vec3(self.camera.position).into(), rot);
        constant_world_velocity_trajectory(
            start,
            vec3(self.camera.velocity),
            vec3(self.camera.omega),
            self.dt,
            self.frames,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
dt = 0.1
frames = 3
seed = 9

[intrinsics]
fx = 120.0
fy = 120.0
cx = 64.0
cy = 48.0
width = 128
height = 96

[camera]
velocity = [0.0, 0.0, 2.0]
omega = [0.0, 0.05, 0.0]

[[primitive]]
kind = "box"
center = [0.0, 0.0, 12.0]
size = [2.0, 1.0, 1.0]

[[primitive]]
kind = "point_set"
points = [[0.0, 0.0, 5.0], [1.0, 0.0, 5.0]]
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = SceneConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.frames, 3);
        assert_eq!(cfg.seed, 9);
        let scene = cfg.scene();
        assert_eq!(scene.len(), 2);
        assert!(matches!(scene[0].shape, Shape::Box { .. }));
        let traj = cfg.trajectory();
        assert_eq!(traj.len(), 3);
        assert!((traj[1].time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SceneConfig::from_toml_str("dt = 0.1").is_err());
        let no_dt = SAMPLE.replace("dt = 0.1", "dt = 0.0");
        assert!(matches!(
            SceneConfig::from_toml_str(&no_dt),
            Err(Error::Config(_))
        ));
        let bad_size = SAMPLE.replace("size = [2.0, 1.0, 1.0]", "size = [0.0, 1.0, 1.0]");
        assert!(SceneConfig::from_toml_str(&bad_size).is_err());
        let unknown = format!("{SAMPLE}\nbogus = 1\n");
        assert!(SceneConfig::from_toml_str(&unknown).is_err());
    }
}
