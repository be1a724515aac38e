//! `invariants`: per-frame TC/TTC color maps, band lines, and CSV dumps.

use anyhow::{Context, Result};

use flowvariants::invariants::iso_bands;
use flowvariants::io::{self, RenderSpec, RgbImage};

use super::shared::{fmt9, zero_padded, FieldContext};
use crate::InvariantsArgs;

const TC_LINE: [u8; 3] = [0, 160, 0];
const TTC_LINE: [u8; 3] = [0, 0, 255];

pub fn run(args: &InvariantsArgs) -> Result<()> {
    if args.bands.is_empty() || args.bands.windows(2).any(|w| w[0] >= w[1]) {
        anyhow::bail!("--bands must be strictly ascending");
    }
    let ctx = FieldContext::load(&args.inputs)?;
    let vmax = *args.bands.last().unwrap();

    let mut failures = Vec::new();
    for frame in &ctx.frames {
        if let Err(err) = process_frame(&ctx, args, frame, vmax) {
            failures.push((frame.index, err));
        }
    }
    super::shared::finish(failures)
}

fn process_frame(
    ctx: &FieldContext,
    args: &InvariantsArgs,
    frame: &super::shared::FrameInput,
    vmax: f64,
) -> Result<()> {
    let stem = zero_padded(frame.index);
    let flow = ctx.load_flow(frame)?;
    let pose = ctx.pose(frame.index)?;

    let fields = if pose.t.norm() < 1e-12 {
        eprintln!("warning: frame {stem} has zero translation speed; writing invalid maps");
        None
    } else {
        Some(ctx.process(&flow, &pose.ego())?)
    };
    let all_invalid;
    let invariants = match &fields {
        Some(f) => &f.invariants,
        None => {
            all_invalid = ctx.invalid_field();
            &all_invalid
        }
    };

    let spec = RenderSpec::new(0.0, vmax)?;
    let (w, h) = (invariants.width, invariants.height);
    let tc_map = io::render_map(&invariants.tc, &invariants.valid, w, h, &spec)?;
    io::write_ppm(&ctx.out.join(format!("{stem}_tc.ppm")), &tc_map)?;
    let ttc_map = io::render_map(&invariants.ttc, &invariants.valid, w, h, &spec)?;
    io::write_ppm(&ctx.out.join(format!("{stem}_ttc.ppm")), &ttc_map)?;

    // Band lines of both invariants in one image, optionally over a source
    // frame.
    let mut lines = match &args.image_dir {
        Some(dir) => {
            let path = dir.join(format!("{stem}.ppm"));
            io::read_ppm(&path)
                .with_context(|| format!("reading source image {}", path.display()))?
        }
        None => RgbImage::filled(w, h, [255, 255, 255]),
    };
    if invariants.valid.iter().any(|&v| v) {
        let tc_bands = iso_bands(&invariants.tc, &invariants.valid, w, h, &args.bands)?;
        io::overlay_boundaries(&mut lines, &tc_bands, TC_LINE)?;
        let ttc_bands = iso_bands(&invariants.ttc, &invariants.valid, w, h, &args.bands)?;
        io::overlay_boundaries(&mut lines, &ttc_bands, TTC_LINE)?;
    }
    io::write_ppm(&ctx.out.join(format!("{stem}_bands.ppm")), &lines)?;

    let mut csv = String::from("u,v,alpha,alpha_dot,tc,ttc\n");
    if let Some(f) = &fields {
        for v in 0..h {
            for u in 0..w {
                let idx = v * w + u;
                if !f.invariants.valid[idx] {
                    continue;
                }
                csv.push_str(&format!(
                    "{u},{v},{},{},{},{}\n",
                    fmt9(f.alpha.alpha[idx]),
                    fmt9(f.alpha.alpha_dot[idx]),
                    fmt9(f.invariants.tc[idx]),
                    fmt9(f.invariants.ttc[idx]),
                ));
            }
        }
    }
    io::atomic_write(
        &ctx.out.join(format!("{stem}_invariants.csv")),
        csv.as_bytes(),
    )?;
    Ok(())
}
