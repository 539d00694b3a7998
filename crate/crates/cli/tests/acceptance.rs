//! Acceptance criteria, one line per criterion. Runs without the libtest harness so the
//! lines are always printed; exits nonzero when any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use pscut::fixtures::grid_drawing;
use pscut::rounding::PipelineConfig;
use pscut::verify::{self, SuiteReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite_outcome(r: &SuiteReport, elapsed: Duration, budget: Duration, keys: &[&str]) -> Outcome {
    let stats: Vec<String> = keys
        .iter()
        .filter_map(|k| r.stats.get(*k).map(|v| format!("{k}={v:.4}")))
        .collect();
    let mut detail = format!("checks={} {} time={:.1}s/{}s", r.checks, stats.join(" "), elapsed.as_secs_f64(), budget.as_secs());
    if let Some(f) = &r.failure {
        detail += &format!(" failure: {f}");
    }
    Outcome {
        pass: r.passed && elapsed <= budget,
        detail,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn duality() -> Outcome {
    let (r, t) = timed(|| verify::duality(8));
    suite_outcome(&r, t, Duration::from_secs(10), &["instances", "cycles"])
}

fn decoupling() -> Outcome {
    let (r, t) = timed(|| verify::decoupling(1_000_000, 1));
    suite_outcome(&r, t, Duration::from_secs(5), &["points", "min_slack"])
}

fn ldd() -> Outcome {
    let (r, t) = timed(|| verify::ldd(5, &[2.0, 4.0, 8.0], &[1, 2, 3], 10_000, 0.2));
    let keys: Vec<&str> = r.stats.keys().map(String::as_str).collect();
    suite_outcome(&r, t, Duration::from_secs(60), &keys)
}

fn patch() -> Outcome {
    let fixtures = verify::harness_fixtures(12);
    let (r, t) = timed(|| verify::patch(&fixtures, &[1, 2, 3], 0.5, &[2, 3]));
    let mut o = suite_outcome(
        &r,
        t,
        Duration::from_secs(300),
        &["instances", "runs", "patches", "failure_frequency_default_z", "failure_frequency", "worst_ratio_over_bound"],
    );
    if fixtures.len() < 20 {
        o.pass = false;
        o.detail += &format!(" only {} fixtures", fixtures.len());
    }
    o
}

fn lp_integral() -> Outcome {
    let fixtures = verify::harness_fixtures(8);
    let (r, t) = timed(|| verify::lp_integral(&fixtures, 0.5, 1));
    let keys: Vec<&str> = r.stats.keys().map(String::as_str).collect();
    suite_outcome(&r, t, Duration::from_secs(120), &keys)
}

fn marginals() -> Outcome {
    let inst = grid_drawing(2, 3).instance(&[(0, 5, 3), (2, 3, 2), (1, 4, 1)]);
    let (r, t) = timed(|| verify::lp_marginals(&inst, 3.0, 100_000, 3.0, 1));
    let mut o = suite_outcome(&r, t, Duration::from_secs(300), &["x_vars", "fractional_x", "edge_pairs", "demand_pairs", "worst_x_z"]);
    if r.stats.get("fractional_x").copied().unwrap_or(0.0) < 1.0 {
        o.pass = false;
        o.detail += " LP solution is integral, marginals untested";
    }
    o
}

fn end_to_end() -> Outcome {
    let instances = verify::end_to_end_instances(30, 10, 1);
    let config = PipelineConfig {
        epsilon: 0.5,
        ..PipelineConfig::default()
    };
    let (r, rows) = verify::end_to_end(&instances, &[1], &config, 3.0, 0.95, 3.0);
    let slowest = rows.iter().map(|x| x.seconds).fold(0.0, f64::max);
    let mut o = suite_outcome(
        &r,
        Duration::ZERO,
        Duration::from_secs(1),
        &["runs", "share_within_bound", "optimal_runs", "mean_ratio", "worst_ratio"],
    );
    o.detail = o.detail.replace(" time=0.0s/1s", &format!(" slowest={slowest:.1}s/600s"));
    if instances.len() < 30 || slowest > 600.0 {
        o.pass = false;
    }
    o
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_pscut"))
        .args(args)
        .output()
        .expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend(out.stderr);
    bytes.extend(format!("exit {:?}", out.status.code()).into_bytes());
    bytes
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("pscut-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let grid = dir.join("grid.json");
    let wheel = dir.join("wheel.json");
    let (g, w) = (grid.to_str().unwrap(), wheel.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["generate", "grid", "--rows", "2", "--cols", "3", "--seed", "11", "--output", g],
        vec!["generate", "wheel", "--rim", "5", "--seed", "11", "--output", w],
        vec!["generate", "random-planar", "--rows", "3", "--cols", "3", "--seed", "7"],
        vec!["solve", g, "--seed", "3", "--samples", "50", "--oracle"],
        vec!["solve", w, "--seed", "3", "--samples", "50"],
        vec!["verify", "duality", "--max-edges", "5"],
        vec!["verify", "decoupling", "--points", "20000", "--seed", "2"],
        vec!["verify", "ldd", "--samples", "300", "--seeds", "1,2"],
        vec!["verify", "patch", "--max-n", "6", "--seeds", "1"],
        vec!["verify", "lp-marginals", "--samples", "2000"],
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut out: Vec<Vec<u8>> = commands.iter().map(|c| run(c)).collect();
        out.push(std::fs::read(&grid).unwrap_or_default());
        out.push(std::fs::read(&wheel).unwrap_or_default());
        runs.push(out);
        let _ = std::fs::remove_file(&grid);
        let _ = std::fs::remove_file(&wheel);
    }
    let names: Vec<String> = commands
        .iter()
        .map(|c| c[..2].join(" "))
        .chain(["grid file".to_string(), "wheel file".to_string()])
        .collect();
    let differing: Vec<&String> = names.iter().enumerate().filter(|&(i, _)| runs[0][i] != runs[1][i]).map(|(_, n)| n).collect();
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        pass: differing.is_empty(),
        detail: format!("commands={} differing={:?}", commands.len(), differing),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("duality", duality),
        ("decoupling", decoupling),
        ("ldd", ldd),
        ("patch harness", patch),
        ("lp integral feasibility", lp_integral),
        ("rounding marginals", marginals),
        ("end-to-end approximation", end_to_end),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += !o.pass as usize;
        println!("criterion {} {name}: {} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
