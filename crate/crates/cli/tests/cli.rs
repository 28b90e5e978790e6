use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn camsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_camsynth")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(args: &[&str]) -> String {
    let o = camsynth(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A `motions × n` corpus at 32×24, 8 frames.
fn corpus(dir: &Path, motions: &str, n: usize) -> PathBuf {
    let cfg = dir.join("ds.json");
    fs::write(
        &cfg,
        format!(r#"{{"width": 32, "height": 24, "frames": 8, "n_per_motion": {n}, "motions": {motions}}}"#),
    )
    .unwrap();
    let root = dir.join("data");
    ok(&["dataset", "build", "--config", p(&cfg), "--out", p(&root)]);
    root
}

fn count_dirs(root: &Path) -> usize {
    ["X_a", "X_c"]
        .iter()
        .flat_map(|s| fs::read_dir(root.join(s)).unwrap())
        .flat_map(|m| fs::read_dir(m.unwrap().path()).unwrap())
        .filter(|e| e.as_ref().unwrap().path().is_dir())
        .count()
}

#[test]
fn minimal_corpus_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let ra = corpus(a.path(), r#"["push_in"]"#, 2);
    let rb = corpus(b.path(), r#"["push_in"]"#, 2);
    assert_eq!(count_dirs(&ra), 4);
    assert_eq!(fs::read(ra.join("manifest.json")).unwrap(), fs::read(rb.join("manifest.json")).unwrap());
    let resolved = json(&ra.join("resolved_config.json"));
    assert_eq!(resolved["n_per_motion"], 2);
    assert_eq!(resolved["motions"], serde_json::json!(["push_in"]));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"width": 32, "colour_depth": 8}"#).unwrap();
    let o = camsynth(&["dataset", "build", "--config", p(&cfg), "--out", p(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour_depth"));

    let o = camsynth(&["dataset", "build", "--set", "scene.nope=1", "--out", p(&dir.path().join("y"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));

    assert_eq!(code(&camsynth(&["dataset", "build", "--set", "frames=0", "--out", p(&dir.path().join("z"))])), 2);
    assert_eq!(code(&camsynth(&["render", "--no-such-flag"])), 2);
    assert_eq!(code(&camsynth(&["frobnicate"])), 2);
}

#[test]
fn scene_trajectory_render_and_metrics() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["scene", "gen", "--seed", "7", "--out", p(&d.join("scene"))]);
    let scene = d.join("scene/scene.json");
    // Re-running from the resolved config reproduces the scene exactly.
    ok(&["scene", "gen", "--config", p(&d.join("scene/resolved_config.json")), "--out", p(&d.join("again"))]);
    assert_eq!(fs::read(&scene).unwrap(), fs::read(d.join("again/scene.json")).unwrap());

    for (name, motion) in [("a", "push_in"), ("b", "push_in+truck_left"), ("c", "orbit")] {
        ok(&[
            "trajectory",
            "gen",
            "--motion",
            motion,
            "--scene",
            p(&scene),
            "--set",
            "frames=6",
            "--set",
            "width=32",
            "--set",
            "height=24",
            "--out",
            p(&d.join(name)),
        ]);
    }
    let poses = d.join("a/poses.jsonl");
    ok(&["render", "--scene", p(&scene), "--trajectory", p(&poses), "--out", p(&d.join("ra"))]);
    ok(&["render", "--scene", p(&scene), "--trajectory", p(&d.join("b/poses.jsonl")), "--out", p(&d.join("rb"))]);
    assert!(d.join("ra/frames/frame_0005.ppm").exists());
    assert!(d.join("ra/resolved_config.json").exists());

    let same: Value = serde_json::from_str(&ok(&["metrics", "traj", "--gt", p(&poses), "--est", p(&poses)])).unwrap();
    assert_eq!(same["trans_err"], 0.0);
    assert_eq!(same["rot_err"], 0.0);
    let diff: Value =
        serde_json::from_str(&ok(&["metrics", "traj", "--gt", p(&poses), "--est", p(&d.join("b/poses.jsonl"))]))
            .unwrap();
    assert!(diff["trans_err"].as_f64().unwrap() > 0.0);
    assert_eq!(diff["per_frame_trans"].as_array().unwrap().len(), 6);

    let frames = d.join("ra/frames");
    let flow: Value =
        serde_json::from_str(&ok(&["metrics", "flow", "--pred", p(&frames), "--gt", p(&frames)])).unwrap();
    assert_eq!(flow["flow_loss"], 0.0);
    let flow: Value =
        serde_json::from_str(&ok(&["metrics", "flow", "--pred", p(&frames), "--gt", p(&d.join("rb/frames"))])).unwrap();
    assert!(flow["flow_loss"].as_f64().unwrap() > 0.0);

    // Mismatched frame counts.
    ok(&[
        "trajectory",
        "gen",
        "--set",
        "frames=9",
        "--set",
        "width=32",
        "--set",
        "height=24",
        "--out",
        p(&d.join("long")),
    ]);
    let long = d.join("long/poses.jsonl");
    assert_eq!(code(&camsynth(&["metrics", "traj", "--gt", p(&poses), "--est", p(&long)])), 1);
    ok(&["render", "--scene", p(&scene), "--trajectory", p(&long), "--out", p(&d.join("rl"))]);
    assert_eq!(code(&camsynth(&["metrics", "flow", "--pred", p(&frames), "--gt", p(&d.join("rl/frames"))])), 1);
}

fn curve_totals(path: &Path) -> Vec<f64> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

const SMALL: [&str; 6] = ["--set", "model.hidden=32", "--set", "train.steps=120", "--set", "train.batch_size=4"];

fn train(dataset: &Path, stage: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--stage", stage, "--dataset", p(dataset), "--out", p(out)];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    camsynth(&args)
}

#[test]
fn two_step_training_and_sampling() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let data = corpus(d, r#"["push_in", "truck_left"]"#, 5);
    let run = d.join("run");
    let base = run.join("base.ckpt");
    let appearance = run.join("appearance.ckpt");
    let camera = run.join("camera.ckpt");

    assert_eq!(code(&train(&data, "base", &run, &[])), 0);
    assert!(base.exists() && run.join("base_resolved_config.json").exists());

    let o = train(&data, "appearance", &run, &["--base", p(&base)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(appearance.exists());
    let totals = curve_totals(&run.join("appearance_curve.csv"));
    assert_eq!(totals.len(), 120);
    assert!(mean(&totals[totals.len() - 20..]) < mean(&totals[..20]), "appearance loss did not fall");

    // Same seed, same bytes.
    let again = d.join("again");
    assert_eq!(code(&train(&data, "appearance", &again, &["--base", p(&base)])), 0);
    assert_eq!(fs::read(&appearance).unwrap(), fs::read(again.join("appearance.ckpt")).unwrap());

    let o = train(&data, "camera", &d.join("orphan"), &["--base", p(&base)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("appearance"));
    assert_eq!(code(&train(&data, "appearance", &d.join("nobase"), &[])), 2);

    let o = train(&data, "camera", &run, &["--base", p(&base), "--appearance", p(&appearance)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(camera.exists() && run.join("camera_curve.csv").exists());

    // The appearance path points nowhere: dropping it must mean never opening it.
    let missing = d.join("no-such-appearance.ckpt");
    let sample = |out: &str, extra: &[&str]| {
        let mut args = vec!["sample", "--base", p(&base), "--camera", p(&camera), "--dataset", p(&data)];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--seed", "3", "--out"]);
        let out = d.join(out);
        let o = camsynth(&[args, vec![p(&out)]].concat());
        (o, out)
    };
    let (o, s1) = sample("s1", &["--appearance", p(&missing), "--drop-appearance"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (o, _) = sample("s_missing", &["--appearance", p(&missing)]);
    assert_eq!(code(&o), 1);
    let (o, s2) = sample("s2", &["--drop-appearance"]);
    assert_eq!(code(&o), 0);
    for k in 0..8 {
        let f = format!("frames/frame_{k:04}.ppm");
        assert_eq!(fs::read(s1.join(&f)).unwrap(), fs::read(s2.join(&f)).unwrap());
    }
    let report = json(&s1.join("report.json"));
    assert!(report["style_score"].as_f64().unwrap().is_finite());
    assert!(report["motion_correlation"].as_f64().unwrap().is_finite());
    assert_eq!(report["appearance_active"], false);
    assert_eq!(report["virtual_bit"], false);
    assert!(s1.join("resolved_config.json").exists());

    let (o, kept) = sample("kept", &["--appearance", p(&appearance)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&kept.join("report.json"))["appearance_active"], true);
}

#[test]
fn trajectory_paradigm_trains_an_encoder_delta() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let data = corpus(d, r#"["pan_left"]"#, 2);
    let run = d.join("run");
    let traj = ["--paradigm", "trajectory"];
    assert_eq!(code(&train(&data, "base", &run, &traj)), 0);
    let base = run.join("base.ckpt");
    assert_eq!(code(&train(&data, "appearance", &run, &[&traj[..], &["--base", p(&base)]].concat())), 0);
    let app = run.join("appearance.ckpt");
    let o = train(&data, "camera", &run, &[&traj[..], &["--base", p(&base), "--appearance", p(&app)]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = d.join("s");
    ok(&[
        "sample",
        "--base",
        p(&base),
        "--camera",
        p(&run.join("camera.ckpt")),
        "--dataset",
        p(&data),
        "--drop-appearance",
        "--out",
        p(&out),
    ]);
    assert_eq!(json(&out.join("report.json"))["paradigm"], "trajectory");
}

#[test]
fn docs_page_covers_every_command() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cli.md");
    ok(&["docs", "--out", p(&out)]);
    let page = fs::read_to_string(out).unwrap();
    for cmd in [
        "scene gen",
        "trajectory gen",
        "camsynth render",
        "dataset build",
        "metrics traj",
        "metrics flow",
        "camsynth train",
        "camsynth sample",
    ] {
        assert!(page.contains(&format!("`camsynth {}`", cmd.trim_start_matches("camsynth "))), "{cmd}");
    }
    assert!(page.contains("\"n_per_motion\""));
    assert!(page.contains("\"lambda\""));
}
