//! `flowvariants` — dense optical flow plus ego-motion in, invariant maps,
//! threat masks, and constancy-domain point clouds out.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "flowvariants",
    version,
    about = "Optical-flow invariants: TC/TTC maps, threat segmentation, constancy-domain clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene: flow files, poses, depth, ground truth.
    Simulate(SimulateArgs),
    /// Compute per-frame TC/TTC maps, band lines, and CSV dumps.
    Invariants(InvariantsArgs),
    /// Label threats against an invariant cylinder and extract regions.
    Segment(SegmentArgs),
    /// Embed frames into the constancy domain and evaluate tracked features.
    Constancy(ConstancyArgs),
}

/// Inputs shared by every field-processing subcommand.
#[derive(Args)]
struct FieldInputs {
    /// Directory of NNNNNN.flo flow files.
    #[arg(long)]
    flow_dir: PathBuf,
    /// Pose CSV: frame,time,tx,ty,tz,wx,wy,wz.
    #[arg(long)]
    poses: PathBuf,
    /// Intrinsics JSON: {fx, fy, cx, cy, width, height}.
    #[arg(long)]
    intrinsics: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Mask radius around the heading axis, radians.
    #[arg(long, default_value_t = flowvariants::eps_axis_default())]
    eps_axis: f64,
    /// Minimum |alpha rate| in rad/s; slower pixels are masked.
    #[arg(long, default_value_t = flowvariants::EPS_RATE_DEFAULT)]
    eps_rate: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scene/trajectory TOML config.
    #[arg(long)]
    scene: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed from the scene config.
    #[arg(long)]
    seed: Option<u64>,
    /// Produce flow by re-projection between consecutive poses instead of
    /// the analytic rate.
    #[arg(long)]
    two_frame_flow: bool,
    /// Multiplicative flow noise sigma (fraction of magnitude).
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Additive isotropic flow noise sigma, pixels.
    #[arg(long, default_value_t = 0.0)]
    noise_add_px: f64,
}

#[derive(Args)]
struct InvariantsArgs {
    #[command(flatten)]
    inputs: FieldInputs,
    /// Band edges in seconds for the iso-line rendering.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    bands: Vec<f64>,
    /// Optional directory of NNNNNN.ppm frames to draw band lines onto.
    #[arg(long)]
    image_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    inputs: FieldInputs,
    /// Threat threshold on TC, seconds.
    #[arg(long, default_value_t = 3.0)]
    tc_max: f64,
    /// Threat threshold on TTC, seconds.
    #[arg(long, default_value_t = 6.0)]
    ttc_max: f64,
    /// Smallest reported threat region, pixels.
    #[arg(long, default_value_t = flowvariants::segmentation::MIN_REGION_SIZE_DEFAULT)]
    min_region: usize,
}

#[derive(Args)]
struct ConstancyArgs {
    #[command(flatten)]
    inputs: FieldInputs,
    /// Feature tracks CSV: frame,id,u,v.
    #[arg(long)]
    tracks: PathBuf,
    /// Pixel stride of the exported point clouds.
    #[arg(long, default_value_t = flowvariants::domain::STRIDE_DEFAULT)]
    stride: usize,
}

fn main() {
    if let Ok(threads) = std::env::var("FLOWVARIANTS_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid FLOWVARIANTS_THREADS={threads}"),
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Invariants(args) => commands::invariants::run(&args),
        Command::Segment(args) => commands::segment::run(&args),
        Command::Constancy(args) => commands::constancy::run(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
