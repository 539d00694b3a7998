//! `pscut`: generate instances, solve them, run the verification suites.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | bad command line (from clap) |
//! | 3 | I/O error |
//! | 4 | instance file does not parse or is not a valid embedding |
//! | 5 | instance has no positive demand |
//! | 6 | invalid generator or run parameters |
//! | 7 | normalisation failed |
//! | 8 | clustering failed |
//! | 9 | profile enumeration failed |
//! | 10 | LP failed |
//! | 11 | no rounded cut |
//! | 12 | oracle failed |
//! | 13 | a verification suite failed |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pscut::fixtures::{generate, grid_drawing, Family, WeightParams};
use pscut::lp::{to_lp_format, Solver};
use pscut::planar::Instance;
use pscut::rng::stage_rng;
use pscut::rounding::{first_lp, pipeline, PipelineConfig, PipelineError, PipelineReport};
use pscut::verify::{self, SuiteReport};

#[derive(Debug)]
enum Failure {
    Io(String),
    Parse(String),
    Params(String),
    Pipeline(PipelineError),
    Suite(SuiteReport),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 3,
            Failure::Parse(_) => 4,
            Failure::Params(_) => 6,
            Failure::Pipeline(e) => match e {
                PipelineError::NoDemand => 5,
                PipelineError::BadInfiniteFace(_) => 6,
                PipelineError::Reduction(_) => 7,
                PipelineError::Planar(_) => 4,
                PipelineError::Ndhc(_) => 8,
                PipelineError::Profiles(_) => 9,
                PipelineError::Lp(_) => 10,
                PipelineError::NoCut => 11,
                PipelineError::Oracle(_) => 12,
            },
            Failure::Suite(_) => 13,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) => format!("i/o error: {m}"),
            Failure::Parse(m) => m.clone(),
            Failure::Params(m) => format!("invalid parameters: {m}"),
            Failure::Pipeline(e) => e.to_string(),
            Failure::Suite(r) => format!(
                "suite {} failed: {}",
                r.suite,
                r.failure.as_deref().unwrap_or("unknown")
            ),
        }
    }
}

#[derive(Parser)]
#[command(name = "pscut", version, about = "Sparsest cut on planar graphs")]
struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance of a graph family.
    Generate(GenerateArgs),
    /// Run the approximation pipeline on an instance file.
    Solve(SolveArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Grid,
    Wheel,
    RandomPlanar,
}

#[derive(Args)]
struct GenerateArgs {
    family: FamilyName,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Rim vertices of a wheel.
    #[arg(long, default_value_t = 5)]
    rim: usize,
    /// Edges kept by random-planar; defaults to one per vertex plus a few.
    #[arg(long)]
    keep: Option<usize>,
    #[arg(long, default_value_t = 4)]
    cost_max: u64,
    #[arg(long, default_value_t = 3)]
    demand_pairs: usize,
    #[arg(long, default_value_t = 5)]
    demand_max: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverName {
    Auto,
    Exact,
    Float,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Crossing budget of the clustering.
    #[arg(long)]
    z: Option<usize>,
    /// Samples per cluster are `a log2 n`.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Largest number of clustering tree nodes.
    #[arg(long, default_value_t = 4000)]
    cap_tree: usize,
    #[arg(long, default_value_t = 6)]
    cap_partitions: usize,
    #[arg(long, default_value_t = 1024)]
    cap_kappa: usize,
    /// Fail instead of continuing when a clustering cap is hit.
    #[arg(long)]
    strict_caps: bool,
    /// Largest number of dual cycles enumerated per guess.
    #[arg(long, default_value_t = 200_000)]
    cap_cycles: usize,
    /// Largest LP (variables) solved per guess.
    #[arg(long, default_value_t = 2_000_000)]
    cap_lp_vars: usize,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Rounding samples per LP.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Compare against the brute-force optimum.
    #[arg(long)]
    oracle: bool,
    /// Use one normalisation guess instead of iterating over all of them.
    #[arg(long)]
    single_guess: bool,
    /// Primal vertex used as the designated dual face.
    #[arg(long, default_value_t = 0)]
    infinite_face: usize,
    #[arg(long, value_enum, default_value_t = SolverName::Auto)]
    solver: SolverName,
    /// Write the first guess's LP in CPLEX LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    /// Include wall-clock stage timings (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Also write the report as JSON.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Duality,
    Decoupling,
    Ldd,
    Patch,
    LpIntegral,
    LpMarginals,
    EndToEnd,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// duality: largest edge count of the sub-drawings.
    #[arg(long, default_value_t = 8)]
    max_edges: usize,
    /// decoupling: simplex points.
    #[arg(long, default_value_t = 1_000_000)]
    points: usize,
    /// ldd: grid side.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// ldd: diameter bounds.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0])]
    bounds: Vec<f64>,
    /// ldd, patch, end-to-end: seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    seeds: Vec<u64>,
    /// ldd, lp-marginals: samples.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// ldd: allowed relative spread of the fitted constant across seeds.
    #[arg(long, default_value_t = 0.2)]
    spread: f64,
    /// patch, lp-integral, end-to-end: largest vertex count of the fixtures.
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    /// patch: extra crossing budgets that force patching.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
    small_z: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// lp-marginals: demand threshold of the LP.
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// lp-marginals: width of the binomial band in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    /// end-to-end: instance count.
    #[arg(long, default_value_t = 30)]
    count: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn io<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(io(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<(), Failure> {
    let family = match a.family {
        FamilyName::Grid => Family::Grid { rows: a.rows, cols: a.cols },
        FamilyName::Wheel => Family::Wheel { rim: a.rim },
        FamilyName::RandomPlanar => Family::RandomPlanar {
            rows: a.rows,
            cols: a.cols,
            keep: a.keep.unwrap_or(a.rows * a.cols + 2),
        },
    };
    let weights = WeightParams {
        cost_max: a.cost_max,
        demand_pairs: a.demand_pairs,
        demand_max: a.demand_max,
    };
    let mut rng = stage_rng(a.seed, "generate", &[]);
    let inst = generate(family, weights, &mut rng).map_err(|e| Failure::Params(e.0))?;
    emit(&(inst.to_json() + "\n"), a.output.as_deref())
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    Instance::from_json(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn solve_config(a: &SolveArgs) -> Result<PipelineConfig, Failure> {
    if !(a.epsilon > 0.0 && a.epsilon <= 1.0) {
        return Err(Failure::Params(format!("epsilon {} outside (0, 1]", a.epsilon)));
    }
    let caps = [a.cap_tree, a.cap_partitions, a.cap_kappa, a.cap_cycles, a.cap_lp_vars, a.samples];
    if caps.contains(&0) || a.z == Some(0) {
        return Err(Failure::Params("caps, samples and z must be positive".into()));
    }
    Ok(PipelineConfig {
        epsilon: a.epsilon,
        seed: a.seed,
        z: a.z,
        a: a.a,
        cap_partitions: a.cap_partitions,
        cap_kappa: a.cap_kappa,
        cap_nodes: a.cap_tree,
        strict_caps: a.strict_caps,
        cap_cycles: a.cap_cycles,
        cap_lp_vars: a.cap_lp_vars,
        alpha_min: a.alpha_min,
        alpha_max: a.alpha_max,
        samples: a.samples,
        single_guess: a.single_guess,
        infinite_face: a.infinite_face,
        solver: match a.solver {
            SolverName::Auto => Solver::Auto,
            SolverName::Exact => Solver::Exact,
            SolverName::Float => Solver::Float,
        },
        tolerance: 1e-7,
        oracle: a.oracle,
    })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// Plain-text report; floats are printed with fixed precision so runs compare byte for byte.
fn render(report: &PipelineReport) -> String {
    let mut s = String::new();
    let b = &report.best;
    let _ = writeln!(s, "sparsity {} ({:.6})", b.sparsity, b.sparsity.to_f64());
    let _ = writeln!(s, "cost {}", b.cost);
    let _ = writeln!(s, "demand {}", b.demand);
    let _ = writeln!(s, "cut {}", join(&b.set));
    if let Some(o) = &report.oracle {
        let _ = writeln!(s, "oracle {} ({:.6}) cut {}", o.sparsity, o.sparsity.to_f64(), join(&o.set));
    }
    if let Some(g) = report.oracle_gap {
        let _ = writeln!(s, "oracle_gap {g:.6}");
    }
    let _ = writeln!(s, "guesses {}", report.guesses.len());
    for (i, g) in report.guesses.iter().enumerate() {
        let _ = writeln!(
            s,
            "guess {i} edge {} pair {} {} tree_nodes {} cap_events {} profiles {} lp_vars {} lp_rows {}",
            g.guess_edge, g.guess_pair.0, g.guess_pair.1, g.tree_nodes, g.cap_events, g.profiles, g.lp_vars, g.lp_rows
        );
        if let Some(why) = &g.skipped {
            let _ = writeln!(s, "  skipped {why}");
        }
        for a in &g.alphas {
            let obj = a.lp_objective.map_or("-".into(), |x| format!("{x:.6}"));
            let best = a.best.as_ref().map_or("-".into(), |c| c.sparsity.to_string());
            let _ = writeln!(s, "  alpha {:.6} {} objective {obj} best {best} draws {}", a.alpha, a.status, a.draws);
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning {w}");
    }
    for (k, v) in &report.timings {
        let _ = writeln!(s, "time_ms {k} {v:.3}");
    }
    s
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    let config = solve_config(a)?;
    if let Some(path) = &a.export_lp {
        let model = first_lp(&inst, &config).map_err(Failure::Pipeline)?;
        std::fs::write(path, to_lp_format(&model)).map_err(io(path))?;
    }
    let mut report = pipeline(&inst, &config).map_err(Failure::Pipeline)?;
    if !a.timings {
        report.timings.clear();
    }
    print!("{}", render(&report));
    if let Some(path) = &a.output {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(io(path))?;
    }
    Ok(())
}

fn run_suite(a: &VerifyArgs) -> SuiteReport {
    match a.suite {
        Suite::Duality => verify::duality(a.max_edges),
        Suite::Decoupling => verify::decoupling(a.points, a.seed),
        Suite::Ldd => verify::ldd(a.grid, &a.bounds, &a.seeds, a.samples, a.spread),
        Suite::Patch => verify::patch(&verify::harness_fixtures(a.max_n), &a.seeds, a.epsilon, &a.small_z),
        Suite::LpIntegral => verify::lp_integral(&verify::harness_fixtures(a.max_n.min(8)), a.epsilon, a.seed),
        Suite::LpMarginals => {
            let inst = grid_drawing(2, 3).instance(&[(0, 5, 3), (2, 3, 2), (1, 4, 1)]);
            verify::lp_marginals(&inst, a.alpha, a.samples, a.sigma, a.seed)
        }
        Suite::EndToEnd => {
            let instances = verify::end_to_end_instances(a.count, a.max_n.min(10), a.seed);
            let config = PipelineConfig {
                epsilon: a.epsilon,
                ..PipelineConfig::default()
            };
            verify::end_to_end(&instances, &a.seeds, &config, 2.0 * (1.0 + a.epsilon), 0.95, 3.0).0
        }
    }
}

fn render_suite(r: &SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "suite {}", r.suite);
    let _ = writeln!(s, "result {}", if r.passed { "pass" } else { "fail" });
    let _ = writeln!(s, "checks {}", r.checks);
    for (k, v) in &r.stats {
        let _ = writeln!(s, "stat {k} {v:.6}");
    }
    if let Some(f) = &r.failure {
        let _ = writeln!(s, "failure {f}");
    }
    s
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let r = run_suite(a);
    if a.json {
        let json = serde_json::to_string_pretty(&r).map_err(|e| Failure::Io(e.to_string()))?;
        println!("{json}");
    } else {
        print!("{}", render_suite(&r));
    }
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Suite(r))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
