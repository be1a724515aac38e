//! `segment`: threat mask, free-space mask, and threat regions per frame.

use anyhow::Result;

use flowvariants::io;
use flowvariants::segmentation::{connected_regions, free_space_mask, threat_mask, ThreatCylinder};

use super::shared::{fmt9, zero_padded, FieldContext};
use crate::SegmentArgs;

pub fn run(args: &SegmentArgs) -> Result<()> {
    if args.tc_max <= 0.0 || args.ttc_max <= 0.0 {
        anyhow::bail!("--tc-max and --ttc-max must be positive");
    }
    let ctx = FieldContext::load(&args.inputs)?;
    let cyl = ThreatCylinder::time_based(args.tc_max, args.ttc_max);

    let mut failures = Vec::new();
    for frame in &ctx.frames {
        if let Err(err) = process_frame(&ctx, args, &cyl, frame) {
            failures.push((frame.index, err));
        }
    }
    super::shared::finish(failures)
}

fn process_frame(
    ctx: &FieldContext,
    args: &SegmentArgs,
    cyl: &ThreatCylinder,
    frame: &super::shared::FrameInput,
) -> Result<()> {
    let stem = zero_padded(frame.index);
    let flow = ctx.load_flow(frame)?;
    let pose = ctx.pose(frame.index)?;
    let speed = pose.t.norm();

    let (mask, regions) = if speed < 1e-12 {
        eprintln!("warning: frame {stem} has zero translation speed; writing invalid mask");
        let invalid = ctx.invalid_field();
        (threat_mask(&invalid, cyl, speed), Vec::new())
    } else {
        let fields = ctx.process(&flow, &pose.ego())?;
        let mask = threat_mask(&fields.invariants, cyl, speed);
        let regions = connected_regions(
            &mask,
            &fields.invariants,
            Some(&fields.alpha),
            args.min_region,
        );
        (mask, regions)
    };

    io::write_mask_pgm(&ctx.out.join(format!("{stem}_mask.pgm")), &mask)?;
    io::write_bool_pgm(
        &ctx.out.join(format!("{stem}_free.pgm")),
        mask.width,
        mask.height,
        &free_space_mask(&mask),
    )?;

    let mut csv = String::from("id,min_u,min_v,max_u,max_v,pixels,mean_tc,mean_ttc\n");
    for r in &regions {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.id,
            r.bbox.0,
            r.bbox.1,
            r.bbox.2,
            r.bbox.3,
            r.pixels.len(),
            fmt9(r.mean_tc),
            fmt9(r.mean_ttc),
        ));
    }
    io::atomic_write(&ctx.out.join(format!("{stem}_regions.csv")), csv.as_bytes())?;
    Ok(())
}
