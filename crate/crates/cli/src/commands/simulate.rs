//! `simulate`: render a configured scene into flow files, poses, depth
//! maps, and ground-truth tables.

use anyhow::{Context, Result};

use flowvariants::io;
use flowvariants::sim::{generate_sequence, FlowMode, NoiseModel, RenderOptions, SceneConfig};

use super::shared::{fmt9, zero_padded};
use crate::SimulateArgs;

pub fn run(args: &SimulateArgs) -> Result<()> {
    let config = SceneConfig::load(&args.scene)
        .with_context(|| format!("reading scene config {}", args.scene.display()))?;
    let scene = config.scene();
    let trajectory = config.trajectory();
    let intr = config.intrinsics;

    let noise = (args.noise_sigma > 0.0 || args.noise_add_px > 0.0).then_some(NoiseModel {
        sigma_mult: args.noise_sigma,
        sigma_add_px: args.noise_add_px,
    });
    let opts = RenderOptions {
        frame_dt: config.dt,
        flow_mode: if args.two_frame_flow {
            FlowMode::TwoFrame
        } else {
            FlowMode::Analytic
        },
        noise,
        seed: args.seed.unwrap_or(config.seed),
        ..RenderOptions::default()
    };

    let flow_dir = args.out.join("flow");
    let depth_dir = args.out.join("depth");
    let truth_dir = args.out.join("truth");
    for dir in [&args.out, &flow_dir, &depth_dir, &truth_dir] {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }

    io::write_intrinsics(&args.out.join("intrinsics.json"), &intr)?;
    let records: Vec<io::PoseRecord> = trajectory
        .iter()
        .enumerate()
        .map(|(i, s)| io::PoseRecord {
            frame: i as u32,
            time: s.time,
            t: s.t,
            omega: s.omega,
        })
        .collect();
    io::write_poses(&args.out.join("poses.csv"), &records)?;

    let frames = generate_sequence(&scene, &trajectory, &intr, &opts);
    for frame in &frames {
        let stem = zero_padded(frame.index as u32);
        io::write_flow(&flow_dir.join(format!("{stem}.flo")), &frame.flow)?;

        // Depth as 16-bit millimeters; 0 marks pixels with no hit.
        let depth_mm: Vec<u16> = frame
            .depth
            .iter()
            .map(|&r| {
                if r.is_finite() {
                    (r * 1000.0).round().clamp(1.0, 65535.0) as u16
                } else {
                    0
                }
            })
            .collect();
        io::write_pgm16(
            &depth_dir.join(format!("{stem}.pgm")),
            intr.width,
            intr.height,
            &depth_mm,
        )?;

        let mut csv = String::from("u,v,range,alpha,alpha_dot,tc,ttc\n");
        for v in 0..intr.height {
            for u in 0..intr.width {
                let idx = v * intr.width + u;
                if !frame.truth.valid[idx] {
                    continue;
                }
                csv.push_str(&format!(
                    "{u},{v},{},{},{},{},{}\n",
                    fmt9(frame.depth[idx]),
                    fmt9(frame.truth.alpha[idx]),
                    fmt9(frame.truth.alpha_dot[idx]),
                    fmt9(frame.truth.tc[idx]),
                    fmt9(frame.truth.ttc[idx]),
                ));
            }
        }
        io::atomic_write(&truth_dir.join(format!("{stem}.csv")), csv.as_bytes())?;
    }

    println!(
        "simulated {} frame(s) at {}x{} into {}",
        frames.len(),
        intr.width,
        intr.height,
        args.out.display()
    );
    Ok(())
}
