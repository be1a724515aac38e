//! `constancy`: constancy-domain point clouds, tracked-feature distance
//! tables, and the cross-frame constancy summary.

use std::collections::BTreeMap;

use anyhow::{Context, Result};

use flowvariants::domain::{
    constancy_error, group_tracks, pairwise_distances, to_domain_cloud, DomainPoint,
};
use flowvariants::geometry::alpha_gamma_map;
use flowvariants::invariants::scale_by_speed;
use flowvariants::io;

use super::shared::{zero_padded, FieldContext};
use crate::ConstancyArgs;

pub fn run(args: &ConstancyArgs) -> Result<()> {
    let ctx = FieldContext::load(&args.inputs)?;
    let observations = io::read_tracks(&args.tracks)
        .with_context(|| format!("reading tracks {}", args.tracks.display()))?;
    let mut tracks = group_tracks(&observations);
    if tracks.is_empty() {
        anyhow::bail!(
            "tracks file {} has no feature seen in two or more frames",
            args.tracks.display()
        );
    }

    // Frames that both the tracks and the flow directory name.
    let tracked_frames: Vec<u32> = {
        let mut set: Vec<u32> = tracks
            .iter()
            .flat_map(|t| t.pixels.keys().copied())
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    };

    let mut processed = Vec::new();
    let mut failures = Vec::new();
    for &index in &tracked_frames {
        let Some(frame) = ctx.frames.iter().find(|f| f.index == index) else {
            failures.push((
                index,
                anyhow::anyhow!("tracks name frame {index} but no flow file exists"),
            ));
            continue;
        };
        match process_frame(&ctx, args, frame, &mut tracks) {
            Ok(()) => processed.push(index),
            Err(err) => failures.push((index, err)),
        }
    }

    // Constancy table: first processed frame against each later one.
    if processed.len() >= 2 {
        let base = processed[0];
        let mut rows = Vec::new();
        for &other in &processed[1..] {
            let err = constancy_error(&tracks, base, other)
                .with_context(|| format!("constancy between frames {base} and {other}"))?;
            rows.push((base, other, err));
        }
        io::write_constancy_csv(&ctx.out.join("constancy.csv"), &rows)?;
    }

    super::shared::finish(failures)
}

fn process_frame(
    ctx: &FieldContext,
    args: &ConstancyArgs,
    frame: &super::shared::FrameInput,
    tracks: &mut [flowvariants::FeatureTrack],
) -> Result<()> {
    let stem = zero_padded(frame.index);
    let flow = ctx.load_flow(frame)?;
    let pose = ctx.pose(frame.index)?;
    if pose.t.norm() < 1e-12 {
        anyhow::bail!("zero translation speed; the domain is undefined for this frame");
    }

    let fields = ctx.process(&flow, &pose.ego())?;
    let scaled = scale_by_speed(&fields.invariants, fields.frame.speed)?;
    let gammas = alpha_gamma_map(&fields.frame, &ctx.grid);
    let cloud = to_domain_cloud(&scaled, &gammas, &fields.frame, frame.index, args.stride)?;
    io::write_cloud_ply(&ctx.out.join(format!("{stem}_cloud.ply")), &cloud)?;

    // Tracked features: sample the field at the nearest pixel.
    let mut present: BTreeMap<u32, DomainPoint> = BTreeMap::new();
    for track in tracks.iter() {
        let Some(&(u, v)) = track.pixels.get(&frame.index) else {
            continue;
        };
        let (ui, vi) = (u.round() as i64, v.round() as i64);
        if ui < 0 || vi < 0 || ui >= scaled.width as i64 || vi >= scaled.height as i64 {
            eprintln!("note: track {} is outside frame {stem}", track.id);
            continue;
        }
        let idx = vi as usize * scaled.width + ui as usize;
        if !scaled.valid[idx] {
            eprintln!(
                "note: track {} has no valid invariants at frame {stem}",
                track.id
            );
            continue;
        }
        present.insert(
            track.id,
            DomainPoint::new(
                scaled.d[idx],
                scaled.s_axial[idx],
                gammas.values[idx].gamma,
                &fields.frame,
            ),
        );
    }

    if present.len() >= 2 {
        let ids: Vec<u32> = present.keys().copied().collect();
        let points: Vec<DomainPoint> = present.values().copied().collect();
        let matrix = pairwise_distances(&points)?;
        io::write_distance_csv(
            &ctx.out.join(format!("{stem}_distances.csv")),
            &ids,
            &matrix,
        )?;
    }
    for track in tracks.iter_mut() {
        if let Some(point) = present.get(&track.id) {
            track.points.insert(frame.index, *point);
        }
    }
    Ok(())
}
