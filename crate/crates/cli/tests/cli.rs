use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seqpar_cli::format::{PieceRecord, RobotRecord, SegmentRecord};
use seqpar_cli::{ScenarioFile, TrajectoryFile};
use seqpar_core::{classify, plan, random_scenario, verify, Degeneracy, ScenarioSpec};
use tempfile::TempDir;

fn seqpar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqpar"))
        .args(args)
        .env_remove("SEQPAR_TOL")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const DEGENERATE: &str = r#"{"dimension": 2, "obstacles": [[0, 0], [4, 0]], "waypoints": [[[1, 1]], [[1, 5]]]}"#;
const GENERIC: &str = r#"{"dimension": 2, "obstacles": [[0, 0], [4, 0]], "waypoints": [[[1, 1]], [[3, 2]]]}"#;

#[test]
fn plan_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let scenario = write(dir.path(), "s.json", DEGENERATE);
    let out = dir.path().join("t.json");
    let csv = dir.path().join("t.csv");
    let svg = dir.path().join("t.svg");
    let r = seqpar(&[
        "plan", "--scenario", s(&scenario), "--out", s(&out), "--csv", s(&csv), "--samples", "11", "--svg", s(&svg),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 12);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let r = seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&out), "--oracle-samples", "1000"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(report["waypoint_max_error"], 0.0);
    assert_eq!(report["base_constant"], true);
    assert_eq!(report["stratum"], "c=3;s=2;t=1;[o1][z1.1,z2.1][o2]");
}

#[test]
fn worked_example_has_lead_in_core_lead_out() {
    let dir = TempDir::new().unwrap();
    let scenario = write(dir.path(), "s.json", DEGENERATE);
    let out = dir.path().join("t.json");
    assert_eq!(code(&seqpar(&["plan", "--scenario", s(&scenario), "--out", s(&out)])), 0);
    let file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.delta, Some(1.0));
    assert!(file.desingularized);
    let pieces = &file.robots[0].pieces;
    let first = &pieces[0];
    assert_eq!((first.t0, first.t1), (0.0, 0.25));
    assert_eq!(
        first.segment,
        SegmentRecord::Line {
            start: vec![1.0, 1.0],
            end: vec![1.5, 1.0]
        }
    );
    let last = pieces.last().unwrap();
    assert_eq!((last.t0, last.t1), (0.75, 1.0));
    assert_eq!(
        last.segment,
        SegmentRecord::Line {
            start: vec![2.0, 5.0],
            end: vec![1.0, 5.0]
        }
    );
    // the core section runs strictly inside the middle half
    assert!(pieces[1..pieces.len() - 1].iter().all(|p| p.t0 >= 0.25 && p.t1 <= 0.75));
}

#[test]
fn classify_prints_canonical_strings() {
    let dir = TempDir::new().unwrap();
    let r = seqpar(&["classify", "--scenario", s(&write(dir.path(), "g.json", GENERIC))]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout(&r), "c=4;s=2;t=2;[o1][z1.1][z2.1][o2]\nc=4 s=2 t=2\n");
    let r = seqpar(&["classify", "--scenario", s(&write(dir.path(), "d.json", DEGENERATE))]);
    assert!(stdout(&r).starts_with("c=3;s=2;t=1;"));
}

#[test]
fn refusal_band_exits_3() {
    let dir = TempDir::new().unwrap();
    let near = r#"{"dimension": 2, "obstacles": [[0, 0], [4, 0]], "waypoints": [[[1, 1]], [[4.00000002, 2]]]}"#;
    let r = seqpar(&["classify", "--scenario", s(&write(dir.path(), "n.json", near))]);
    assert_eq!(code(&r), 3, "{}", stderr(&r));
    let r = seqpar(&["plan", "--scenario", s(&write(dir.path(), "n.json", near)), "--out", "unused.json"]);
    assert_eq!(code(&r), 3);
}

#[test]
fn tolerance_override_from_environment() {
    let dir = TempDir::new().unwrap();
    let near = r#"{"dimension": 2, "obstacles": [[0, 0], [4, 0]], "waypoints": [[[1, 1]], [[4.00000002, 2]]]}"#;
    let path = write(dir.path(), "n.json", near);
    let r = Command::new(env!("CARGO_BIN_EXE_seqpar"))
        .args(["classify", "--scenario", s(&path)])
        .env("SEQPAR_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).starts_with("c=3;s=2;t=1;"));
    let r = Command::new(env!("CARGO_BIN_EXE_seqpar"))
        .args(["classify", "--scenario", s(&path)])
        .env("SEQPAR_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(code(&r), 2);
}

#[test]
fn odd_dimension_exits_2() {
    let dir = TempDir::new().unwrap();
    let odd = r#"{"dimension": 3, "obstacles": [[0,0,0],[1,0,0]], "waypoints": [[[0,1,0]],[[0,2,0]]]}"#;
    let r = seqpar(&["plan", "--scenario", s(&write(dir.path(), "o.json", odd)), "--out", "x.json"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("dimension must be even"));
}

#[test]
fn missing_file_exits_1() {
    let r = seqpar(&["plan", "--scenario", "/nonexistent/s.json", "--out", "x.json"]);
    assert_eq!(code(&r), 1);
    let r = seqpar(&["classify", "--scenario", "/nonexistent/s.json"]);
    assert_eq!(code(&r), 1);
}

#[test]
fn malformed_json_exits_2() {
    let dir = TempDir::new().unwrap();
    let r = seqpar(&["classify", "--scenario", s(&write(dir.path(), "bad.json", "{\"dimension\": 2"))]);
    assert_eq!(code(&r), 2);
}

#[test]
fn svg_is_refused_outside_the_plane() {
    let dir = TempDir::new().unwrap();
    let four = r#"{"dimension": 4, "obstacles": [[0,0,0,0],[1,0,0,0]], "waypoints": [[[0,1,0,0]],[[0,2,0,0]]]}"#;
    let out = dir.path().join("t.json");
    let r = seqpar(&[
        "plan", "--scenario", s(&write(dir.path(), "f.json", four)), "--out", s(&out), "--svg", "p.svg",
    ]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("--svg needs a planar scenario"));
    assert!(!out.exists());
}

#[test]
fn tampered_trajectory_exits_4() {
    let dir = TempDir::new().unwrap();
    let scenario = write(dir.path(), "s.json", GENERIC);
    let out = dir.path().join("t.json");
    assert_eq!(code(&seqpar(&["plan", "--scenario", s(&scenario), "--out", s(&out)])), 0);
    let mut file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // shift the whole path so that every join survives but waypoints are missed
    for piece in &mut file.robots[0].pieces {
        match &mut piece.segment {
            SegmentRecord::Line { start, end } => {
                start[1] += 0.1;
                end[1] += 0.1;
            }
            SegmentRecord::Arc { center, .. } => center[1] += 0.1,
        }
    }
    let tampered = write(dir.path(), "bad.json", &serde_json::to_string(&file).unwrap());
    let r = seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&tampered)]);
    assert_eq!(code(&r), 4);
    let report: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert!((report["waypoint_max_error"].as_f64().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn broken_trajectory_exits_4() {
    let dir = TempDir::new().unwrap();
    let scenario = write(dir.path(), "s.json", GENERIC);
    let out = dir.path().join("t.json");
    assert_eq!(code(&seqpar(&["plan", "--scenario", s(&scenario), "--out", s(&out)])), 0);
    let mut file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    file.robots[0].pieces[0].t1 = 0.01;
    let broken = write(dir.path(), "bad.json", &serde_json::to_string(&file).unwrap());
    let r = seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&broken)]);
    assert_eq!(code(&r), 4);
    file.robots.pop();
    let short = write(dir.path(), "short.json", &serde_json::to_string(&file).unwrap());
    assert_eq!(code(&seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&short)])), 4);
}

#[test]
fn undersampled_oracle_disagreement_exits_4() {
    // a straight pass whose closest approach to o3 is mid-segment
    let dir = TempDir::new().unwrap();
    let text = r#"{"dimension": 2, "obstacles": [[0, 0], [10, 0], [2, 0.9]], "waypoints": [[[1, 1]], [[3, 1]]]}"#;
    let scenario = write(dir.path(), "s.json", text);
    let parsed: ScenarioFile = serde_json::from_str(text).unwrap();
    let stratum = classify(&parsed.to_scenario(None).unwrap()).unwrap();
    let file = TrajectoryFile {
        stratum: stratum.to_string(),
        delta: None,
        desingularized: false,
        robots: vec![RobotRecord {
            pieces: vec![PieceRecord {
                segment: SegmentRecord::Line {
                    start: vec![1.0, 1.0],
                    end: vec![3.0, 1.0],
                },
                t0: 0.0,
                t1: 1.0,
            }],
        }],
        obstacles: vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![2.0, 0.9]],
    };
    let traj = write(dir.path(), "t.json", &serde_json::to_string(&file).unwrap());
    let r = seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&traj)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let r = seqpar(&["verify", "--scenario", s(&scenario), "--trajectory", s(&traj), "--oracle-samples", "2"]);
    assert_eq!(code(&r), 4);
    assert!(stderr(&r).contains("oracle disagrees"));
}

#[test]
fn count_subcommand() {
    let r = seqpar(&["count", "--m", "3", "--n", "2", "--r", "4"]);
    assert_eq!(stdout(&r), "pieces 10\ncomplexity 9\n");
    let r = seqpar(&["count", "--m", "1", "--n", "1", "--r", "2"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("m ≥ 2 required"));
}

#[test]
fn file_round_trip_across_the_corpus() {
    for seed in 0..1000u64 {
        let degeneracy = Degeneracy::ALL[seed as usize % 5];
        let d = if seed % 2 == 0 { 2 } else { 4 };
        let m = if degeneracy == Degeneracy::ObstacleObstacle { 3 } else { 2 + (seed / 5 % 3) as usize };
        let spec = ScenarioSpec::new(d, m, 1 + (seed / 3 % 3) as usize, 2 + (seed / 7 % 3) as usize, seed, degeneracy);
        let scenario = random_scenario(&spec).unwrap();
        let text = serde_json::to_string(&ScenarioFile::from_scenario(&scenario)).unwrap();
        let back = serde_json::from_str::<ScenarioFile>(&text).unwrap().to_scenario(None).unwrap();
        assert_eq!(back, scenario);

        let bundle = plan(&scenario).unwrap();
        let text = serde_json::to_string(&TrajectoryFile::from_bundle(&bundle)).unwrap();
        let parsed = serde_json::from_str::<TrajectoryFile>(&text).unwrap().to_bundle().unwrap();
        for k in 0..1000 {
            let t = k as f64 / 999.0;
            let (a, b) = (bundle.robots_at(t).unwrap(), parsed.robots_at(t).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!(x.distance(y) <= 1e-12, "seed {seed} t {t}");
            }
        }
        assert!(verify(&back, &parsed).unwrap().passed(), "seed {seed}");
    }
}
