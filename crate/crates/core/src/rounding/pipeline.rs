use std::collections::BTreeMap;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{amplify, round_topdown, simple_cut_from_faces, RoundingError, RoundingPlan};
use crate::lp::{alpha_grid, build_lp, solve_alpha_sweep, LpError, LpModel, LpSolution, Solver};
use crate::ndhc::{build_ndhc, NdhcError, NdhcParams, NdhcTree};
use crate::oracle::{brute_force_sparsest, OracleError, DEFAULT_LIMIT};
use crate::planar::{CutResult, DualGraph, Instance, PlanarError, VertexId};
use crate::profiles::{enumerate_aplus, ProfileError, Profiles};
use crate::reductions::{guess_iterator, in_range, single_guess, NormalizedInstance, ReductionError};
use crate::rng::{derive_seed, stage_rng};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("instance has no positive demand")]
    NoDemand,
    #[error("infinite face {0} is not a vertex")]
    BadInfiniteFace(VertexId),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Ndhc(#[from] NdhcError),
    #[error(transparent)]
    Profiles(#[from] ProfileError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no guess produced a cut")]
    NoCut,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub seed: u64,
    /// Crossing budget; `None` uses the default from `n` and `epsilon`.
    pub z: Option<usize>,
    pub a: f64,
    pub cap_partitions: usize,
    pub cap_kappa: usize,
    pub cap_nodes: usize,
    pub strict_caps: bool,
    /// Simple dual cycles enumerated for the profile sets.
    pub cap_cycles: usize,
    /// Largest LP (variables) attempted per guess.
    pub cap_lp_vars: usize,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    /// Rounding samples per LP.
    pub samples: usize,
    pub single_guess: bool,
    pub infinite_face: VertexId,
    pub solver: Solver,
    pub tolerance: f64,
    pub oracle: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: 0.5,
            seed: 0,
            z: None,
            a: 2.0,
            cap_partitions: 6,
            cap_kappa: 1024,
            cap_nodes: 4000,
            strict_caps: false,
            cap_cycles: 200_000,
            cap_lp_vars: 2_000_000,
            alpha_min: None,
            alpha_max: None,
            samples: 200,
            single_guess: false,
            infinite_face: 0,
            solver: Solver::Auto,
            tolerance: 1e-7,
            oracle: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaRecord {
    pub alpha: f64,
    /// `optimal`, `infeasible` or an error message.
    pub status: String,
    pub lp_objective: Option<f64>,
    /// Best rounded cut of this LP, on the original instance.
    pub best: Option<CutResult>,
    pub draws: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessRecord {
    pub guess_edge: usize,
    pub guess_pair: (VertexId, VertexId),
    pub tree_nodes: usize,
    pub cap_events: usize,
    pub profiles: usize,
    pub lp_vars: usize,
    pub lp_rows: usize,
    pub skipped: Option<String>,
    pub alphas: Vec<AlphaRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub best: CutResult,
    pub guesses: Vec<GuessRecord>,
    pub oracle: Option<CutResult>,
    /// Returned sparsity over the oracle optimum.
    pub oracle_gap: Option<f64>,
    pub warnings: Vec<String>,
    /// Milliseconds per stage, summed over guesses.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub timings: BTreeMap<String, f64>,
}

struct Stage<'a> {
    config: &'a PipelineConfig,
    original: &'a Instance,
    timings: BTreeMap<String, f64>,
    warnings: Vec<String>,
}

impl Stage<'_> {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(label.into()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }

    fn ndhc_params(&self, n: usize, guess: u64) -> NdhcParams {
        let c = self.config;
        let mut p = NdhcParams::new(n, c.epsilon, derive_seed(c.seed, "ndhc", &[guess]));
        if let Some(z) = c.z {
            p.z = z;
        }
        p.a = c.a;
        p.cap_partitions = c.cap_partitions;
        p.cap_kappa = c.cap_kappa;
        p.cap_nodes = c.cap_nodes;
        p.strict = c.strict_caps;
        p
    }

    fn run_guess(&mut self, gi: usize, ni: &NormalizedInstance) -> Result<GuessRecord, PipelineError> {
        let inst = &ni.instance;
        let n = inst.num_vertices();
        let mut rec = GuessRecord {
            guess_edge: ni.guess_edge,
            guess_pair: ni.guess_pair,
            tree_nodes: 0,
            cap_events: 0,
            profiles: 0,
            lp_vars: 0,
            lp_rows: 0,
            skipped: None,
            alphas: Vec::new(),
        };
        let f_inf = ni.vertex_map[self.config.infinite_face];
        let dual = self.time("dual", || DualGraph::new(inst, f_inf))?;
        let params = self.ndhc_params(n, gi as u64);
        let tree = self.time("ndhc", || build_ndhc(&dual, params, None))?;
        rec.tree_nodes = tree.len();
        rec.cap_events = tree.events().len();
        if !tree.events().is_empty() {
            self.warnings.push(format!(
                "guess {gi}: {} clustering cap hits; the tree is best-effort",
                tree.events().len()
            ));
        }
        let profiles = match self.time("profiles", || enumerate_aplus(&tree, &dual, self.config.cap_cycles)) {
            Ok(p) => p,
            Err(e) => {
                self.warnings.push(format!("guess {gi}: skipped, {e}"));
                rec.skipped = Some(e.to_string());
                return Ok(rec);
            }
        };
        rec.profiles = profiles.total();
        let base = self.time("lp_build", || build_lp(&tree, &dual, &profiles, 0.0))?;
        rec.lp_vars = base.num_vars();
        rec.lp_rows = base.num_rows();
        if base.num_vars() > self.config.cap_lp_vars {
            let msg = format!("LP has {} variables, above the cap {}", base.num_vars(), self.config.cap_lp_vars);
            self.warnings.push(format!("guess {gi}: skipped, {msg}"));
            rec.skipped = Some(msg);
            return Ok(rec);
        }
        let total = inst.demands.total() as f64;
        let lo = self.config.alpha_min.unwrap_or(1.0);
        let hi = self
            .config
            .alpha_max
            .unwrap_or_else(|| (n as f64).powi(5).min(total));
        let grid = alpha_grid(self.config.epsilon, lo, hi);
        let original = self.original;
        let config = self.config;
        let solved = self.time("lp_solve", || solve_alpha_sweep(&base, &grid, config.solver, config.tolerance));
        let start = Instant::now();
        rec.alphas = solved
            .par_iter()
            .enumerate()
            .map(|(ai, (model, sol))| round_alpha(config, original, ni, &dual, &tree, &profiles, model, sol, gi, ai))
            .collect();
        *self.timings.entry("round".into()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        Ok(rec)
    }
}

#[allow(clippy::too_many_arguments)]
fn round_alpha(
    config: &PipelineConfig,
    original: &Instance,
    ni: &NormalizedInstance,
    dual: &DualGraph,
    tree: &NdhcTree,
    profiles: &Profiles,
    model: &LpModel,
    sol: &Result<LpSolution, LpError>,
    gi: usize,
    ai: usize,
) -> AlphaRecord {
    let mut rec = AlphaRecord {
        alpha: model.alpha,
        status: String::new(),
        lp_objective: None,
        best: None,
        draws: 0,
    };
    let sol = match sol {
        Ok(s) => s,
        Err(LpError::Infeasible) => {
            rec.status = "infeasible".into();
            return rec;
        }
        Err(e) => {
            rec.status = e.to_string();
            return rec;
        }
    };
    rec.status = "optimal".into();
    rec.lp_objective = Some(sol.objective);
    let plan = RoundingPlan::new(tree, profiles, model, &sol.values, config.tolerance);
    let n = dual.num_faces();
    let sampler = |draw: usize| -> Option<CutResult> {
        let mut rng = stage_rng(config.seed, "round", &[gi as u64, ai as u64, draw as u64]);
        let trace = round_topdown(tree, &plan, &mut rng).ok()?;
        let mut u = FixedBitSet::with_capacity(n);
        for &f in &trace.faces {
            u.insert(f);
        }
        let cut = simple_cut_from_faces(&ni.instance, &u)?;
        ni.lift_cut(original, &cut.bitset(n)).ok()
    };
    // A degenerate plan shows up as every draw failing; report it explicitly.
    if let Err(e) = round_topdown(tree, &plan, &mut stage_rng(config.seed, "round-check", &[gi as u64, ai as u64])) {
        rec.status = format!("optimal; rounding failed: {e}");
        return rec;
    }
    match amplify(sampler, config.samples) {
        Ok(a) => {
            rec.draws = a.draws;
            rec.best = Some(a.best);
        }
        Err(RoundingError::AllInfinite(d)) => rec.draws = d,
        Err(e) => rec.status = format!("optimal; rounding failed: {e}"),
    }
    rec
}

fn check_input(inst: &Instance, config: &PipelineConfig) -> Result<(), PipelineError> {
    if inst.demands.iter().all(|(_, _, d)| d == 0) {
        return Err(PipelineError::NoDemand);
    }
    if config.infinite_face >= inst.num_vertices() {
        return Err(PipelineError::BadInfiniteFace(config.infinite_face));
    }
    Ok(())
}

fn normalize(inst: &Instance, config: &PipelineConfig) -> Result<Vec<NormalizedInstance>, PipelineError> {
    Ok(if config.single_guess {
        vec![single_guess(inst)?]
    } else if in_range(inst) {
        vec![NormalizedInstance::identity(inst)]
    } else {
        guess_iterator(inst).collect()
    })
}

/// The LP of the first normalisation guess at the lowest alpha of the grid, as the
/// pipeline would build it.
pub fn first_lp(inst: &Instance, config: &PipelineConfig) -> Result<LpModel, PipelineError> {
    check_input(inst, config)?;
    let ni = normalize(inst, config)?.into_iter().next().ok_or(PipelineError::NoCut)?;
    let stage = Stage {
        config,
        original: inst,
        timings: BTreeMap::new(),
        warnings: Vec::new(),
    };
    let dual = DualGraph::new(&ni.instance, ni.vertex_map[config.infinite_face])?;
    let tree = build_ndhc(&dual, stage.ndhc_params(ni.instance.num_vertices(), 0), None)?;
    let profiles = enumerate_aplus(&tree, &dual, config.cap_cycles)?;
    Ok(build_lp(&tree, &dual, &profiles, config.alpha_min.unwrap_or(1.0))?)
}

/// Normalise, cluster, solve the LP for every demand guess and round; the sparsest cut
/// found, on the original instance.
pub fn pipeline(inst: &Instance, config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    check_input(inst, config)?;
    let mut stage = Stage {
        config,
        original: inst,
        timings: BTreeMap::new(),
        warnings: Vec::new(),
    };
    let guesses = stage.time("normalize", || normalize(inst, config))?;
    info!("{} normalisation guesses", guesses.len());
    let mut records = Vec::new();
    for (gi, ni) in guesses.iter().enumerate() {
        match stage.run_guess(gi, ni) {
            Ok(r) => records.push(r),
            Err(e) => {
                warn!("guess {gi} failed: {e}");
                stage.warnings.push(format!("guess {gi}: failed, {e}"));
            }
        }
    }
    let best = records
        .iter()
        .flat_map(|g| g.alphas.iter())
        .filter_map(|a| a.best.clone())
        .min_by(|a, b| (a.sparsity, a.set.len(), &a.set).cmp(&(b.sparsity, b.set.len(), &b.set)))
        .ok_or(PipelineError::NoCut)?;
    let oracle = if config.oracle {
        Some(stage.time("oracle", || brute_force_sparsest(inst, DEFAULT_LIMIT))?.best)
    } else {
        None
    };
    let oracle_gap = oracle.as_ref().and_then(|o| best.sparsity.ratio_to(&o.sparsity));
    Ok(PipelineReport {
        best,
        guesses: records,
        oracle,
        oracle_gap,
        warnings: stage.warnings,
        timings: stage.timings,
    })
}
