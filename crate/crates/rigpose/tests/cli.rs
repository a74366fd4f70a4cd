use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rigpose::io::{load_poses, load_trajectory, relative_motion, BENCH_HEADER};
use rigpose_core::geometry::rotation_angle;

fn rigpose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigpose")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn iters_prints_the_iteration_bound() {
    for (s, n) in [("2", "25"), ("6", "439"), ("8", "1765"), ("17", "905410")] {
        let o = rigpose(&["iters", "--p", "0.999", "--eps", "0.5", "--s", s]);
        assert_eq!(stdout(&o).trim(), n);
    }
}

#[test]
fn solve_recovers_the_fixture_motion() {
    let rig = fixture("rig.json");
    let acs = fixture("pair_inter.jsonl");
    let o = rigpose(&["solve", "--rig", path_str(&rig), "--acs", path_str(&acs), "--mode", "inter"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gt = load_trajectory(&fixture("gt.txt")).unwrap();
    let truth = relative_motion(&gt[0].pose, &gt[1].pose);
    let best = json["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let q: Vec<f64> = c["q_wxyz"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let r = rigpose::io::rotation_from_wxyz([q[0], q[1], q[2], q[3]]).unwrap();
            rotation_angle(&(truth.rotation * r.inverse())).to_degrees()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-4, "best candidate is {best} degrees off");
}

#[test]
fn bench_writes_the_csv_contract_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "bench".to_string(),
            "--trials".into(),
            "2".into(),
            "--sigma".into(),
            "0,0.5".into(),
            "--solvers".into(),
            "ka-inter".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let argv = args(out);
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        stdout(&rigpose(&refs));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some(BENCH_HEADER));
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.contains(",random,") && l.contains(",2AC-ka-inter,")));
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "4"), (&b, "4"), (&c, "5")] {
        stdout(&rigpose(&["synth", "--out", path_str(out), "--seed", seed, "--sigma", "0.5", "--frames", "2"]));
    }
    for f in ["rig.json", "acs.jsonl", "gt.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(std::fs::read(a.join("acs.jsonl")).unwrap(), std::fs::read(c.join("acs.jsonl")).unwrap());
}

#[test]
fn ransac_then_traj_closes_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&rigpose(&["synth", "--out", path_str(d), "--seed", "21", "--sigma", "0", "--frames", "3", "--mode", "inter"]));
    let poses = d.join("poses.jsonl");
    let traj = d.join("traj.txt");
    stdout(&rigpose(&[
        "ransac",
        "--rig",
        path_str(&d.join("rig.json")),
        "--acs",
        path_str(&d.join("acs.jsonl")),
        "--mode",
        "inter",
        "--gt",
        path_str(&d.join("gt.txt")),
        "--out",
        path_str(&poses),
    ]));
    let records: Vec<serde_json::Value> =
        std::fs::read_to_string(&poses).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert!(r["eps_r_deg"].as_f64().unwrap() < 1e-4, "{r}");
        assert_eq!(r["inliers"], r["correspondences"]);
    }

    stdout(&rigpose(&["traj", "--poses", path_str(&poses), "--out", path_str(&traj)]));
    let frames = load_trajectory(&traj).unwrap();
    let motions = load_poses(&poses).unwrap();
    assert_eq!(frames.len(), motions.len() + 1);
    for (k, (_, m)) in motions.iter().enumerate() {
        let back = relative_motion(&frames[k].pose, &frames[k + 1].pose);
        assert!(rotation_angle(&(back.rotation * m.rotation.inverse())) < 1e-12);
        assert!((back.translation - m.translation).norm() < 1e-12);
    }
    let gt = load_trajectory(&d.join("gt.txt")).unwrap();
    let end = gt.last().unwrap().pose.translation - frames.last().unwrap().pose.translation;
    assert!(end.norm() < 1e-6, "drift {end}");
}

#[test]
fn malformed_inputs_give_one_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"frame_pair\": 0, \"cam1\": 0}\n").unwrap();
    let rig = fixture("rig.json");
    let o = rigpose(&["solve", "--rig", path_str(&rig), "--acs", path_str(&bad), "--mode", "inter"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: parse: "), "{err}");
    assert!(err.contains("bad.jsonl:1:"), "{err}");

    let o = rigpose(&["solve", "--rig", path_str(&bad), "--acs", path_str(&bad), "--mode", "inter"]);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: parse: "));

    let o = rigpose(&["iters", "--p", "0.999", "--eps", "1.5", "--s", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: config: "));

    let o = rigpose(&["ransac", "--mode", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: usage: "), "{err}");
}

#[test]
fn pixel_and_normalized_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = (dir.path().join("p"), dir.path().join("n"));
    for (out, space) in [(&p, "pixel"), (&n, "normalized")] {
        stdout(&rigpose(&["synth", "--out", path_str(out), "--seed", "2", "--sigma", "0.3", "--space", space]));
    }
    let rig = rigpose::io::load_rig(&p.join("rig.json")).unwrap();
    let a = rigpose::io::load_acs(&p.join("acs.jsonl"), &rig).unwrap();
    let b = rigpose::io::load_acs(&n.join("acs.jsonl"), &rig).unwrap();
    assert_eq!(a[&0].len(), 200);
    for (x, y) in a[&0].iter().zip(&b[&0]) {
        assert!((x.x.to_vector() - y.x.to_vector()).norm() < 1e-12);
        assert!((x.x_prime.to_vector() - y.x_prime.to_vector()).norm() < 1e-12);
        assert!((x.affine - y.affine).norm() < 1e-12);
        assert_eq!((x.cam_view1, x.cam_view2), (y.cam_view1, y.cam_view2));
    }
}
