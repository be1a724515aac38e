//! End-to-end tests of the `flowvariants` binary: file-level behavior,
//! determinism, and error paths.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_flowvariants")
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn flowvariants")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SCENE: &str = r#"
dt = 0.1
frames = 4
seed = 3

[intrinsics]
fx = 150.0
fy = 150.0
cx = 128.0
cy = 96.0
width = 256
height = 192

[camera]
velocity = [0.0, 0.0, 2.0]
omega = [0.01, 0.03, 0.005]

[[primitive]]
kind = "box"
center = [1.0, 0.0, 8.0]
size = [1.0, 1.0, 1.0]
"#;

fn write_scene(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scene.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn simulate(dir: &Path, scene: &str, extra: &[&str]) -> PathBuf {
    let scene_path = write_scene(dir, scene);
    let out = dir.join("sim");
    let mut args = vec![
        "simulate".to_string(),
        "--scene".into(),
        scene_path.display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let result = run(&args);
    assert!(
        result.status.success(),
        "simulate failed: {}",
        stderr_of(&result)
    );
    out
}

fn field_args(cmd: &str, sim: &Path, out: &Path) -> Vec<String> {
    vec![
        cmd.to_string(),
        "--flow-dir".into(),
        sim.join("flow").display().to_string(),
        "--poses".into(),
        sim.join("poses.csv").display().to_string(),
        "--intrinsics".into(),
        sim.join("intrinsics.json").display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ]
}

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut map = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                map.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    map
}

/// Parses a numeric CSV with a header into rows keyed by the (u, v) pixel.
fn read_pixel_csv(path: &Path) -> BTreeMap<(u32, u32), Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows = BTreeMap::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let u: u32 = fields[0].parse().unwrap();
        let v: u32 = fields[1].parse().unwrap();
        rows.insert(
            (u, v),
            fields[2..].iter().map(|f| f.parse().unwrap()).collect(),
        );
    }
    rows
}

#[test]
fn simulate_writes_the_full_inventory_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sim_a = simulate(
        dir.path(),
        SCENE,
        &["--noise-sigma", "0.01", "--noise-add-px", "0.2"],
    );

    for name in ["poses.csv", "intrinsics.json"] {
        assert!(sim_a.join(name).is_file(), "{name} missing");
    }
    for k in 0..4 {
        assert!(sim_a.join(format!("flow/{k:06}.flo")).is_file());
        assert!(sim_a.join(format!("depth/{k:06}.pgm")).is_file());
        assert!(sim_a.join(format!("truth/{k:06}.csv")).is_file());
    }

    let dir_b = tempfile::tempdir().unwrap();
    let sim_b = simulate(
        dir_b.path(),
        SCENE,
        &["--noise-sigma", "0.01", "--noise-add-px", "0.2"],
    );
    assert_eq!(
        tree_bytes(&sim_a),
        tree_bytes(&sim_b),
        "same seed must reproduce bytes"
    );

    let dir_c = tempfile::tempdir().unwrap();
    let sim_c = simulate(
        dir_c.path(),
        SCENE,
        &[
            "--noise-sigma",
            "0.01",
            "--noise-add-px",
            "0.2",
            "--seed",
            "99",
        ],
    );
    assert_ne!(
        std::fs::read(sim_a.join("flow/000000.flo")).unwrap(),
        std::fs::read(sim_c.join("flow/000000.flo")).unwrap(),
        "different seed must change noisy flow"
    );
}

#[test]
fn invariant_maps_match_simulated_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), SCENE, &[]);
    let out = dir.path().join("inv");
    let result = run(field_args("invariants", &sim, &out));
    assert!(result.status.success(), "{}", stderr_of(&result));

    for k in 0..4 {
        for suffix in ["tc.ppm", "ttc.ppm", "bands.ppm", "invariants.csv"] {
            assert!(
                out.join(format!("{k:06}_{suffix}")).is_file(),
                "missing {k:06}_{suffix}"
            );
        }
    }

    // The flow files are float32; the dump must still match the analytic
    // truth to well below a microsecond.
    let truth = read_pixel_csv(&sim.join("truth/000002.csv"));
    let got = read_pixel_csv(&out.join("000002_invariants.csv"));
    assert_eq!(
        truth.len(),
        got.len(),
        "oracle and pipeline disagree on valid pixels"
    );
    assert!(truth.len() > 300, "scene too small: {} px", truth.len());
    for (px, t) in &truth {
        let g = &got[px];
        // truth: range,alpha,alpha_dot,tc,ttc ; dump: alpha,alpha_dot,tc,ttc
        let (tc_t, ttc_t) = (t[3], t[4]);
        let (tc_g, ttc_g) = (g[2], g[3]);
        assert!((tc_t - tc_g).abs() < 1e-6, "tc mismatch at {px:?}");
        assert!((ttc_t - ttc_g).abs() < 1e-6, "ttc mismatch at {px:?}");
    }
}

#[test]
fn zero_speed_frames_warn_and_emit_invalid_maps() {
    let dir = tempfile::tempdir().unwrap();
    let scene = SCENE.replace("velocity = [0.0, 0.0, 2.0]", "velocity = [0.0, 0.0, 0.0]");
    let sim = simulate(dir.path(), &scene, &[]);
    let out = dir.path().join("inv");
    let result = run(field_args("invariants", &sim, &out));
    assert!(
        result.status.success(),
        "zero speed is a warning, not an error"
    );
    assert!(stderr_of(&result).contains("zero translation"));

    let csv = std::fs::read_to_string(out.join("000000_invariants.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        1,
        "only the header for an all-invalid frame"
    );
    let ppm = std::fs::read(out.join("000000_tc.ppm")).unwrap();
    assert!(ppm.windows(3).skip(15).all(|w| w != b"nan".as_slice()));
}

#[test]
fn segment_separates_inside_from_outside_obstacles() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), SCENE, &[]);
    let out = dir.path().join("seg");
    let mut args = field_args("segment", &sim, &out);
    args.extend([
        "--tc-max".into(),
        "1.5".into(),
        "--ttc-max".into(),
        "10".into(),
    ]);
    let result = run(&args);
    assert!(result.status.success(), "{}", stderr_of(&result));

    let regions = std::fs::read_to_string(out.join("000000_regions.csv")).unwrap();
    assert_eq!(
        regions.lines().count(),
        2,
        "exactly one threat region:\n{regions}"
    );
    assert!(out.join("000000_mask.pgm").is_file());
    assert!(out.join("000000_free.pgm").is_file());

    // Same box moved outside the cylinder: no threat regions.
    let dir2 = tempfile::tempdir().unwrap();
    let scene_far = SCENE.replace("center = [1.0, 0.0, 8.0]", "center = [4.0, 0.0, 10.0]");
    let sim_far = simulate(dir2.path(), &scene_far, &[]);
    let out_far = dir2.path().join("seg");
    let mut args = field_args("segment", &sim_far, &out_far);
    args.extend([
        "--tc-max".into(),
        "1.5".into(),
        "--ttc-max".into(),
        "10".into(),
    ]);
    let result = run(&args);
    assert!(result.status.success(), "{}", stderr_of(&result));
    let regions = std::fs::read_to_string(out_far.join("000000_regions.csv")).unwrap();
    assert_eq!(
        regions.lines().count(),
        1,
        "expected only the header:\n{regions}"
    );
}

#[test]
fn constancy_reports_small_deviation_for_a_stationary_box() {
    let dir = tempfile::tempdir().unwrap();
    // Straight-line motion so the test can project features exactly; a
    // longer focal length keeps the pixel-quantization error of the manual
    // tracks small against the feature separation.
    let scene = SCENE
        .replace("omega = [0.01, 0.03, 0.005]", "omega = [0.0, 0.0, 0.0]")
        .replace("fx = 150.0", "fx = 300.0")
        .replace("fy = 150.0", "fy = 300.0");
    let fl = 300.0;
    let sim = simulate(dir.path(), &scene, &[]);

    // Five features on the box front face (z = 7.5), projected manually for
    // frames 0 and 2 (camera advances 2 m/s along +z).
    let features = [(0.7, -0.3), (1.3, -0.3), (0.7, 0.3), (1.3, 0.3), (1.0, 0.0)];
    let mut tracks = String::from("frame,id,u,v\n");
    for &frame in &[0u32, 2] {
        let cam_z = 0.2 * frame as f64;
        for (id, &(x, y)) in features.iter().enumerate() {
            let z = 7.5 - cam_z;
            let u = 128.0 + fl * x / z;
            let v = 96.0 + fl * y / z;
            tracks.push_str(&format!("{frame},{id},{u:.3},{v:.3}\n"));
        }
    }
    let tracks_path = dir.path().join("tracks.csv");
    std::fs::write(&tracks_path, tracks).unwrap();

    let out = dir.path().join("con");
    let mut args = field_args("constancy", &sim, &out);
    args.extend(["--tracks".into(), tracks_path.display().to_string()]);
    let result = run(&args);
    assert!(result.status.success(), "{}", stderr_of(&result));

    assert!(out.join("000000_cloud.ply").is_file());
    assert!(out.join("000002_cloud.ply").is_file());
    assert!(out.join("000000_distances.csv").is_file());

    let summary = std::fs::read_to_string(out.join("constancy.csv")).unwrap();
    let row = summary.lines().nth(1).expect("one comparison row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[1], "2");
    let mean_rel: f64 = fields[4].parse().unwrap();
    assert!(
        mean_rel < 0.05,
        "pixel-quantized tracking should stay within a few percent, got {mean_rel}"
    );
}

#[test]
fn single_tracked_frame_yields_clouds_but_no_summary() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), SCENE, &[]);
    let tracks_path = dir.path().join("tracks.csv");
    std::fs::write(
        &tracks_path,
        "frame,id,u,v\n0,1,145,95\n0,2,150,95\n1,1,145,95\n1,2,150,95\n",
    )
    .unwrap();
    let out = dir.path().join("con");
    let mut args = field_args("constancy", &sim, &out);
    args.extend(["--tracks".into(), tracks_path.display().to_string()]);

    // Remove every flow file except frame 0: only one tracked frame remains
    // processable, so clouds are written but no constancy table.
    for k in 1..4 {
        std::fs::remove_file(sim.join(format!("flow/{k:06}.flo"))).unwrap();
    }
    let result = run(&args);
    // Frame 1 is named by the tracks but missing; that is a reported failure.
    assert!(!result.status.success());
    assert!(stderr_of(&result).contains("no flow file"));
    assert!(out.join("000000_cloud.ply").is_file());
    assert!(!out.join("constancy.csv").exists());
}

#[test]
fn error_paths_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();

    // Missing scene config.
    let missing = dir.path().join("nope.toml");
    let result = run([
        "simulate",
        "--scene",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert!(!result.status.success());
    assert!(
        stderr_of(&result).contains("nope.toml"),
        "{}",
        stderr_of(&result)
    );

    // Corrupt flow magic.
    let sim = simulate(dir.path(), SCENE, &[]);
    std::fs::write(
        sim.join("flow/000001.flo"),
        b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00",
    )
    .unwrap();
    let out = dir.path().join("inv");
    let result = run(field_args("invariants", &sim, &out));
    assert!(!result.status.success());
    assert!(
        stderr_of(&result).contains("PIEH"),
        "{}",
        stderr_of(&result)
    );
    // Other frames still processed before the failure is reported.
    assert!(out.join("000000_tc.ppm").is_file());

    // Non-monotonic poses.
    let poses = sim.join("poses.csv");
    let text = std::fs::read_to_string(&poses).unwrap();
    let swapped: Vec<&str> = text.lines().collect();
    let mut lines = swapped.clone();
    lines.swap(2, 3);
    std::fs::write(&poses, lines.join("\n")).unwrap();
    let result = run(field_args("invariants", &sim, &dir.path().join("inv2")));
    assert!(!result.status.success());
    assert!(
        stderr_of(&result).contains("non-monotonic"),
        "{}",
        stderr_of(&result)
    );

    // Intrinsics/flow dimension mismatch.
    let dir2 = tempfile::tempdir().unwrap();
    let sim2 = simulate(dir2.path(), SCENE, &[]);
    let intr_path = sim2.join("intrinsics.json");
    let intr = std::fs::read_to_string(&intr_path).unwrap();
    std::fs::write(&intr_path, intr.replace("256", "128")).unwrap();
    let result = run(field_args("invariants", &sim2, &dir2.path().join("inv")));
    assert!(!result.status.success());
    assert!(stderr_of(&result).contains("128"), "{}", stderr_of(&result));

    // Non-positive thresholds.
    let dir3 = tempfile::tempdir().unwrap();
    let sim3 = simulate(dir3.path(), SCENE, &[]);
    let mut args = field_args("segment", &sim3, &dir3.path().join("seg"));
    args.push("--tc-max=-1.0".into());
    let result = run(&args);
    assert!(!result.status.success());
    assert!(
        stderr_of(&result).contains("positive"),
        "{}",
        stderr_of(&result)
    );
}

#[test]
fn thread_cap_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), SCENE, &[]);
    let out = dir.path().join("inv");
    let result = Command::new(bin())
        .args(field_args("invariants", &sim, &out))
        .env("FLOWVARIANTS_THREADS", "1")
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr_of(&result));

    let result = Command::new(bin())
        .args(field_args("invariants", &sim, &dir.path().join("inv2")))
        .env("FLOWVARIANTS_THREADS", "bogus")
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(stderr_of(&result).contains("FLOWVARIANTS_THREADS"));
}

#[test]
fn two_frame_flow_mode_produces_usable_files() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), SCENE, &["--two-frame-flow"]);
    let out = dir.path().join("inv");
    let result = run(field_args("invariants", &sim, &out));
    assert!(result.status.success(), "{}", stderr_of(&result));
    // Two-frame flow carries discretization error; values stay close to
    // truth but not 1e-6 close.
    let truth = read_pixel_csv(&sim.join("truth/000000.csv"));
    let got = read_pixel_csv(&out.join("000000_invariants.csv"));
    let mut joined = 0;
    for (px, t) in &truth {
        if let Some(g) = got.get(px) {
            assert!(
                (t[3] - g[2]).abs() < 0.2,
                "tc far off at {px:?}: {} vs {}",
                t[3],
                g[2]
            );
            joined += 1;
        }
    }
    assert!(joined > 200);
}
