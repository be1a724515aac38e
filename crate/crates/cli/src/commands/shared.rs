//! Frame discovery and the shared flow-to-invariants pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use flowvariants::derotation::{alpha_rate, derotate, image_flow_to_spherical, EgoMotion};
use flowvariants::geometry::{CameraIntrinsics, DirectionGrid, TranslationFrame};
use flowvariants::invariants::compute_invariants;
use flowvariants::io::{read_intrinsics, read_poses, PoseRecord};
use flowvariants::{AlphaField, FlowField, InvariantField};

use crate::FieldInputs;

pub struct FrameInput {
    pub index: u32,
    pub path: PathBuf,
}

/// All inputs a field subcommand needs, loaded once.
pub struct FieldContext {
    pub intrinsics: CameraIntrinsics,
    pub grid: DirectionGrid,
    pub poses: BTreeMap<u32, PoseRecord>,
    /// Forward time delta per frame, from pose timestamps.
    pub dts: BTreeMap<u32, f64>,
    pub frames: Vec<FrameInput>,
    pub eps_axis: f64,
    pub eps_rate: f64,
    pub out: PathBuf,
}

/// Output of the dense chain for one frame.
pub struct FrameFields {
    pub frame: TranslationFrame,
    pub alpha: AlphaField,
    pub invariants: InvariantField,
}

pub fn zero_padded(index: u32) -> String {
    format!("{index:06}")
}

pub fn fmt9(x: f64) -> String {
    format!("{x:.9e}")
}

/// Lists `NNNNNN.flo` files with numeric stems, ascending.
pub fn list_flow_frames(dir: &Path) -> Result<Vec<FrameInput>> {
    let mut frames = Vec::new();
    let entries = std::fs::read_dir(dir)
        .with_context(|| format!("reading flow directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("flo") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let Ok(index) = stem.parse::<u32>() else {
            bail!(
                "flow file {} does not follow the NNNNNN.flo convention",
                path.display()
            );
        };
        frames.push(FrameInput { index, path });
    }
    if frames.is_empty() {
        bail!("no .flo files found in {}", dir.display());
    }
    frames.sort_by_key(|f| f.index);
    Ok(frames)
}

impl FieldContext {
    pub fn load(inputs: &FieldInputs) -> Result<Self> {
        let intrinsics = read_intrinsics(&inputs.intrinsics)
            .with_context(|| format!("reading intrinsics {}", inputs.intrinsics.display()))?;
        let pose_list = read_poses(&inputs.poses)
            .with_context(|| format!("reading poses {}", inputs.poses.display()))?;
        let frames = list_flow_frames(&inputs.flow_dir)?;
        std::fs::create_dir_all(&inputs.out)
            .with_context(|| format!("creating output directory {}", inputs.out.display()))?;

        // Forward deltas; the last frame reuses the previous spacing.
        let mut dts = BTreeMap::new();
        for pair in pose_list.windows(2) {
            dts.insert(pair[0].frame, pair[1].time - pair[0].time);
        }
        if let Some(last) = pose_list.last() {
            let dt = pose_list
                .windows(2)
                .last()
                .map(|p| p[1].time - p[0].time)
                .unwrap_or(1.0);
            dts.insert(last.frame, dt);
        }
        let poses = pose_list.into_iter().map(|p| (p.frame, p)).collect();

        Ok(Self {
            intrinsics,
            grid: DirectionGrid::new(&intrinsics),
            poses,
            dts,
            frames,
            eps_axis: inputs.eps_axis,
            eps_rate: inputs.eps_rate,
            out: inputs.out.clone(),
        })
    }

    pub fn pose(&self, index: u32) -> Result<&PoseRecord> {
        self.poses
            .get(&index)
            .with_context(|| format!("no pose record for frame {index}"))
    }

    pub fn load_flow(&self, frame: &FrameInput) -> Result<FlowField> {
        let mut flow = flowvariants::io::read_flow(&frame.path)
            .with_context(|| format!("reading flow {}", frame.path.display()))?;
        if (flow.width, flow.height) != (self.intrinsics.width, self.intrinsics.height) {
            bail!(
                "flow {} is {}x{} but intrinsics declare {}x{}",
                frame.path.display(),
                flow.width,
                flow.height,
                self.intrinsics.width,
                self.intrinsics.height
            );
        }
        flow.frame_dt = self.dts.get(&frame.index).copied().unwrap_or(1.0);
        Ok(flow)
    }

    /// Runs the dense chain. The caller has already checked that the
    /// frame's translation speed is usable.
    pub fn process(&self, flow: &FlowField, ego: &EgoMotion) -> Result<FrameFields> {
        let spherical = image_flow_to_spherical(&self.intrinsics, flow)?;
        let derotated = derotate(&spherical, &ego.omega, &self.grid)?;
        let frame = TranslationFrame::from_translation(&ego.t)?;
        let alpha = alpha_rate(&frame, &self.grid, &derotated, self.eps_axis)?;
        let invariants = compute_invariants(&alpha, self.eps_rate);
        Ok(FrameFields {
            frame,
            alpha,
            invariants,
        })
    }

    /// All-invalid field for zero-speed frames.
    pub fn invalid_field(&self) -> InvariantField {
        let n = self.intrinsics.pixel_count();
        InvariantField {
            width: self.intrinsics.width,
            height: self.intrinsics.height,
            tc: vec![0.0; n],
            ttc: vec![0.0; n],
            valid: vec![false; n],
        }
    }
}

/// Reports per-frame failures and converts them into a nonzero exit.
pub fn finish(failures: Vec<(u32, anyhow::Error)>) -> Result<()> {
    if failures.is_empty() {
        return Ok(());
    }
    for (frame, err) in &failures {
        eprintln!("frame {}: {err:#}", zero_padded(*frame));
    }
    bail!("{} frame(s) failed", failures.len());
}
