use std::path::PathBuf;
use std::process::{Command, Output};

use pscut::planar::Instance;

fn pscut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pscut")).args(args).output().expect("binary runs")
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pscut-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn generated(args: &[&str]) -> Instance {
    let out = pscut(args);
    assert!(out.status.success());
    Instance::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn generated_grids_have_the_expected_counts() {
    for (r, c, v, e, f) in [(2, 2, 4, 4, 2), (3, 3, 9, 12, 5)] {
        let inst = generated(&["generate", "grid", "--rows", &r.to_string(), "--cols", &c.to_string()]);
        let g = &inst.graph;
        assert_eq!((g.num_vertices(), g.num_edges(), g.num_faces()), (v, e, f));
    }
    let inst = generated(&["generate", "random-planar", "--rows", "3", "--cols", "4", "--seed", "3"]);
    assert_eq!(inst.num_vertices(), 12);
}

#[test]
fn square_with_oracle_has_gap_one() {
    let path = temp("square.json");
    let inst = pscut::fixtures::square(1);
    std::fs::write(&path, inst.to_json()).unwrap();
    let json = temp("square-report.json");
    let out = pscut(&["solve", path.to_str().unwrap(), "--oracle", "--samples", "20", "--output", json.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("oracle_gap 1.000000"), "{text}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["oracle_gap"], 1.0);
    assert!(report.get("timings").is_none());
}

#[test]
fn exit_codes_follow_the_table() {
    let code = |args: &[&str]| pscut(args).status.code();
    let empty = temp("empty.json");
    std::fs::write(&empty, pscut::fixtures::grid_drawing(2, 2).instance(&[]).to_json()).unwrap();
    assert_eq!(code(&["solve", empty.to_str().unwrap()]), Some(5));
    let bad = temp("bad.json");
    std::fs::write(&bad, "{\"n\": 1, \"edges\": [], \"rotation\": {}, \"extra\": 0}").unwrap();
    assert_eq!(code(&["solve", bad.to_str().unwrap()]), Some(4));
    assert_eq!(code(&["solve", "/nonexistent/x.json"]), Some(3));
    let ok = temp("ok.json");
    std::fs::write(&ok, pscut::fixtures::square(1).to_json()).unwrap();
    assert_eq!(code(&["solve", ok.to_str().unwrap(), "--epsilon", "2"]), Some(6));
    assert_eq!(code(&["solve", ok.to_str().unwrap(), "--infinite-face", "9"]), Some(6));
    assert_eq!(code(&["generate", "wheel", "--rim", "2"]), Some(6));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["verify", "decoupling", "--points", "1000"]), Some(0));
}

#[test]
fn export_lp_writes_a_model() {
    let inst = temp("lp.json");
    std::fs::write(&inst, pscut::fixtures::square(1).to_json()).unwrap();
    let lp = temp("model.lp");
    let out = pscut(&["solve", inst.to_str().unwrap(), "--samples", "5", "--export-lp", lp.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("\nMinimize\n"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn verify_reports_are_machine_readable() {
    let out = pscut(&["verify", "duality", "--max-edges", "4", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "duality");
    assert_eq!(v["passed"], true);
}
