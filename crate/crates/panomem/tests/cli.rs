use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{Rotation3, Vector3};
use panomem::io;
use panomem_core::geometry::{pose_auc, pose_errors, AucCombine};
use panomem_core::{CameraPose, Convention, EquirectImage, SimilarityTransform};
use serde_json::Value;

fn panomem(args: &[&str]) -> Output {
    panomem_env(args, &[])
}

fn panomem_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_panomem"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("PANOMEM_")) {
        cmd.env_remove(k);
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn ok(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn failed(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON object")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_scene(dir: &Path) -> String {
    let p = dir.join("scene.json");
    std::fs::write(&p, r#"{"density": 300}"#).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn trajectory_loop_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let v = ok(&panomem(&["trajectory", "--seed", "3", "-o", s(&a)]));
    assert_eq!(v["poses"], 51);
    assert!(v["closure"].as_f64().unwrap() <= 0.4);
    ok(&panomem(&["trajectory", "--seed", "3", "-o", s(&b)]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let t = io::read_trajectory(&a).unwrap();
    assert_eq!((t.len(), t.seed), (51, Some(3)));

    let w = dir.path().join("w.json");
    let v = ok(&panomem(&["trajectory", "--kind", "walk", "--actions", "F,F,R90,F0.8,R-45", "-o", s(&w)]));
    assert_eq!(v["poses"], 6);
    let e = failed(&panomem(&["trajectory", "--length", "1", "-o", s(&w)]));
    assert_eq!(e["error"], "invalid_argument");
}

#[test]
fn convert_and_rotate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let smooth = EquirectImage::from_fn(256, 128, |phi, theta| {
        let v = 0.5 + 0.3 * (2.0 * phi).sin() * theta.cos();
        [v as f32, 0.5, (1.0 - v) as f32]
    })
    .unwrap();
    let pano = d.join("pano.png");
    io::write_png(&pano, &smooth).unwrap();
    let faces = d.join("faces");
    let v = ok(&panomem(&["convert", s(&pano), s(&faces), "--to", "cube"]));
    assert_eq!(v["face_size"], 64);
    for name in ["front", "back", "left", "right", "top", "bottom"] {
        assert!(faces.join(format!("{name}.png")).exists());
    }
    let back = d.join("back.png");
    ok(&panomem(&["convert", s(&faces), s(&back), "--to", "pano"]));
    let src = io::read_png(&pano).unwrap();
    let out = io::read_png(&back).unwrap();
    // Rows H/8..7H/8.
    let band = 16 * 256..112 * 256;
    let mse = src.rgb[band.clone()]
        .iter()
        .zip(&out.rgb[band.clone()])
        .flat_map(|(a, b)| (0..3).map(move |k| ((a[k] - b[k]) as f64).powi(2)))
        .sum::<f64>()
        / (band.len() * 3) as f64;
    assert!(10.0 * (1.0 / mse).log10() >= 40.0, "{mse}");

    let flat = d.join("flat.png");
    io::write_png(&flat, &EquirectImage::filled(64, 32, [0.2, 0.4, 0.6]).unwrap()).unwrap();
    let ff = d.join("flat_faces");
    ok(&panomem(&["convert", s(&flat), s(&ff), "--to", "cube"]));
    let (_, _, px) = io::read_rgb_png(&ff.join("top.png")).unwrap();
    assert!(px.iter().all(|&p| p == px[0]));

    let wrong = d.join("wrong.png");
    io::write_rgb_png(&wrong, 30, 20, &vec![[0.0; 3]; 600]).unwrap();
    let e = failed(&panomem(&["convert", s(&wrong), s(&ff), "--to", "cube"]));
    assert_eq!(e["error"], "format");
    assert_eq!(e["path"], s(&wrong));

    let rot = d.join("rot.png");
    ok(&panomem(&["rotate", s(&pano), s(&rot)]));
    assert_eq!(std::fs::read(&rot).unwrap(), std::fs::read(&pano).unwrap());
    ok(&panomem(&["rotate", s(&pano), s(&rot), "--dphi", "-90", "--sampling", "nearest"]));
    let r = io::read_png(&rot).unwrap();
    assert_eq!(r.pixel(0, 40), src.pixel(64, 40));
}

#[test]
fn scene_render_and_plucker() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ply = d.join("room.ply");
    let v = ok(&panomem(&["scene", "--density", "400", "-o", s(&ply), "--spec-out", s(&d.join("spec.json"))]));
    assert!(v["points"].as_u64().unwrap() > 10_000);
    let poses = d.join("poses.json");
    io::write_poses(&poses, &[CameraPose::from_yaw(Vector3::new(0.0, 1.5, 0.0), 0.0)]).unwrap();
    let out = d.join("render");
    let v = ok(&panomem(&["render", "--scene", s(&ply), "--poses", s(&poses), "--out-dir", s(&out), "--width", "64"]));
    assert!(v["frames"][0]["covered_fraction"].as_f64().unwrap() > 0.9);
    assert!(out.join("render_0000.png").exists() && out.join("render_0000_mask.png").exists());
    let (w, h, _) = io::read_depth(&out.join("render_0000_depth.f32")).unwrap();
    assert_eq!((w, h), (64, 32));

    let pl = d.join("pl");
    ok(&panomem(&["plucker", "--poses", s(&poses), "--out-dir", s(&pl), "--height", "16"]));
    let f = io::read_plucker(&pl.join("plucker_0000.f32")).unwrap();
    assert_eq!((f.width(), f.height()), (32, 16));
    assert!(f.data().iter().all(|p| ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-6));
}

#[test]
fn explore_writes_a_run_and_eval_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scene = small_scene(d);
    let traj = d.join("traj.json");
    ok(&panomem(&["trajectory", "--length", "28.8", "--max-radius", "2.2", "-o", s(&traj)]));
    assert_eq!(io::read_poses(&traj).unwrap().len(), 73);
    let run = d.join("run");
    let v = ok(&panomem(&[
        "explore", "--scene", &scene, "--trajectory", s(&traj), "--generator", "oracle", "--noise-sigma", "0",
        "-o", s(&run), "--width", "32",
    ]));
    assert_eq!(v["clips"], 3);
    assert_eq!(v["frames"], 73);
    assert_eq!(v["boundary_chaining"], true);
    for c in ["clip_01", "clip_02", "clip_03"] {
        assert!(run.join(c).join("frame_024.png").exists());
        assert!(run.join(c).join("reproj_024_mask.png").exists());
        assert!(run.join(c).join("step.json").exists());
    }
    assert!(!run.join("clip_04").exists());
    assert!(!run.join(".lock").exists());
    assert!(run.join("memory/step_01/manifest.json").exists());
    let m = panomem::run::read_manifest(&run).unwrap();
    assert_eq!(m.clips[1].start, 24);
    assert!(m.loop_consistency.is_some());

    let rep = ok(&panomem(&["eval", "--run", s(&run)]));
    assert_eq!(rep["mse"]["mean"], 0.0);
    assert_eq!(rep["psnr"]["mean"], 99.0);
    assert_eq!(rep["mse"]["per_frame"].as_array().unwrap().len(), 72);
    assert!(rep["loop_consistency"]["mean"].is_f64());

    let e = failed(&panomem(&["explore", "--scene", &scene, "--trajectory", s(&traj), "-o", s(&run), "--width", "8", "--height", "8"]));
    assert_eq!(e["error"], "usage");
    std::fs::write(run.join(".lock"), "1").unwrap();
    let e = failed(&panomem(&["explore", "--scene", &scene, "--trajectory", s(&traj), "-o", s(&run), "--width", "32"]));
    assert_eq!(e["error"], "locked");
}

#[test]
fn compare_emits_loop_report_and_letterbox_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scene = small_scene(d);
    let traj = d.join("traj.json");
    ok(&panomem(&["trajectory", "--length", "6", "--max-radius", "1.5", "--seed", "1", "-o", s(&traj)]));
    let out = d.join("cmp");
    let v = ok(&panomem(&[
        "explore", "--scene", &scene, "--trajectory", s(&traj), "--compare", "--clip-len", "4", "-o", s(&out),
        "--width", "64", "--letterbox", "--no-plucker",
    ]));
    assert!(v["passthrough"]["loop_consistency"].is_f64());
    assert!(v["memory_conditioned"]["loop_consistency"].is_f64());
    assert!(out.join("loop_report.json").exists());
    let (w, h, _) = io::read_rgb_png(&out.join("memory_conditioned/clip_01/frame_001.png")).unwrap();
    assert_eq!((w, h), (64, 36));
    let rep = ok(&panomem(&["eval", "--run", s(&out.join("memory_conditioned"))]));
    assert!(rep["ssim"]["mean"].as_f64().unwrap() < 1.0);
}

#[test]
fn eval_identical_dirs_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for sub in ["a", "b"] {
        for i in 0..3 {
            let img = EquirectImage::filled(32, 16, [0.1 * i as f32, 0.5, 0.7]).unwrap();
            io::write_png(&d.join(sub).join(format!("f{i}.png")), &img).unwrap();
        }
    }
    let json = d.join("r.json");
    let csv = d.join("r.csv");
    ok(&panomem(&[
        "eval", "--reference", s(&d.join("a")), "--frames", s(&d.join("b")), "-o", s(&json), "--csv", s(&csv),
    ]));
    let got: Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let golden: Value =
        serde_json::from_str(include_str!("golden/eval_identical.json")).unwrap();
    assert_eq!(got, golden);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("frame,mse,psnr,ssim\n"));
    let e = failed(&panomem(&["eval", "--reference", s(&d.join("a")), "--frames", s(&d.join("missing"))]));
    assert_eq!(e["error"], "io");
}

fn perturbed(gt: &[CameraPose]) -> Vec<CameraPose> {
    gt.iter()
        .enumerate()
        .map(|(i, p)| {
            let jitter = Rotation3::from_euler_angles(0.02 * i as f64, -0.01 * i as f64, 0.015);
            CameraPose::looking(p.center() + Vector3::new(0.01 * i as f64, 0.0, 0.0), nalgebra::UnitQuaternion::from_rotation_matrix(&jitter) * p.world_from_camera())
        })
        .collect()
}

#[test]
fn eval_pose_auc_matches_direct_call() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gt: Vec<_> = (0..8).map(|i| CameraPose::from_yaw(Vector3::new(0.4 * i as f64, 1.5, 0.1 * (i * i) as f64), 0.2 * i as f64)).collect();
    let est = perturbed(&gt);
    io::write_poses(&d.join("gt.json"), &gt).unwrap();
    io::write_poses(&d.join("est.json"), &est).unwrap();
    let v = ok(&panomem(&["eval", "--est-poses", s(&d.join("est.json")), "--gt-poses", s(&d.join("gt.json"))]));
    let want = pose_auc(&pose_errors(&est, &gt).unwrap(), 30.0, AucCombine::BothWithin).unwrap();
    assert_eq!(v["pose_auc@30"]["mean"].as_f64().unwrap(), want);
}

#[test]
fn align_recovers_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gt: Vec<_> = (0..10).map(|i| CameraPose::from_yaw(Vector3::new((i as f64).sin() * 2.0, 1.5, 0.3 * i as f64), 0.3 * i as f64)).collect();
    io::write_poses(&d.join("gt.json"), &gt).unwrap();
    let v = ok(&panomem(&["align", "--est", s(&d.join("gt.json")), "--gt", s(&d.join("gt.json"))]));
    assert!((v["scale"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["rms_residual"].as_f64().unwrap() < 1e-9);

    let t = SimilarityTransform::new(0.5, Rotation3::from_euler_angles(0.2, 1.0, -0.4), Vector3::new(3.0, -1.0, 2.0));
    let est: Vec<_> = gt.iter().map(|p| t.apply_to_pose(p)).collect();
    io::write_poses(&d.join("est.json"), &est).unwrap();
    let v = ok(&panomem(&["align", "--est", s(&d.join("est.json")), "--gt", s(&d.join("gt.json"))]));
    assert!((v["scale"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(v["rms_residual"].as_f64().unwrap() < 1e-6);

    let cv: Vec<_> = est.iter().map(|p| p.to_convention(Convention::WorldToCameraCv)).collect();
    io::write_poses(&d.join("cv.json"), &cv).unwrap();
    let e = failed(&panomem(&["align", "--est", s(&d.join("cv.json")), "--gt", s(&d.join("gt.json"))]));
    assert!(e["message"].as_str().unwrap().contains("--convert"));
    let v = ok(&panomem(&["align", "--est", s(&d.join("cv.json")), "--gt", s(&d.join("gt.json")), "--convert"]));
    assert!((v["scale"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let e = failed(&panomem(&["align", "--est", s(&d.join("cv.json")), "--gt", s(&d.join("traj_missing.json"))]));
    assert_eq!(e["path"], s(&d.join("traj_missing.json")));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let poses = d.join("poses.json");
    io::write_poses(&poses, &[CameraPose::identity()]).unwrap();
    let cfg = d.join("cfg.json");
    std::fs::write(&cfg, r#"{"width": 16, "height": 8}"#).unwrap();
    let size = |out: &Path| {
        let f = io::read_plucker(&out.join("plucker_0000.f32")).unwrap();
        (f.width(), f.height())
    };
    let run = |args: &[&str], env: &[(&str, &str)], sub: &str| {
        let out = d.join(sub);
        let mut a = vec!["plucker", "--poses", s(&poses), "--out-dir", s(&out)];
        a.extend_from_slice(args);
        ok(&panomem_env(&a, env));
        size(&out)
    };
    assert_eq!(run(&[], &[], "a"), (1024, 512));
    assert_eq!(run(&["--config", s(&cfg)], &[], "b"), (16, 8));
    let env = [("PANOMEM_WIDTH", "32"), ("PANOMEM_HEIGHT", "16")];
    assert_eq!(run(&["--config", s(&cfg)], &env, "c"), (32, 16));
    assert_eq!(run(&["--config", s(&cfg), "--width", "64"], &env, "d"), (64, 32));
    let e = failed(&panomem(&["plucker", "--poses", s(&poses), "--out-dir", s(d), "--bogus"]));
    assert_eq!(e["error"], "usage");
}
