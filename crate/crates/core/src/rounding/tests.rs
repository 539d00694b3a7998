use proptest::prelude::*;

use super::*;
use crate::fixtures::{grid_drawing, k4, square};
use crate::lp::{build_lp, encode_integral, solve_lp, Solver};
use crate::ndhc::{build_ndhc, find_amenable_forcing, NdhcParams};
use crate::oracle::{all_simple_cycles, brute_force_sparsest};
use crate::planar::{sparsity, CutResult, DualGraph, Instance, Sparsity};
use crate::profiles::enumerate_aplus;
use crate::rng::stage_rng;

fn setup(inst: &Instance, seed: u64) -> (DualGraph, NdhcTree, Profiles) {
    let dual = DualGraph::new(inst, 0).unwrap();
    let n = inst.graph.num_vertices();
    let tree = build_ndhc(&dual, NdhcParams::new(n, 0.5, seed), None).unwrap();
    let profiles = enumerate_aplus(&tree, &dual, 100_000).unwrap();
    (dual, tree, profiles)
}

#[test]
fn decoupling_examples() {
    assert_eq!(decoupling_lhs(0.0, 0.5, 0.5, 0.0).unwrap(), 0.5);
    assert_eq!(decoupling_lhs(1.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
    assert_eq!(decoupling_lhs(0.25, 0.25, 0.25, 0.25).unwrap(), 0.5);
    assert!(decoupling_lhs(0.5, 0.5, 0.5, 0.0).is_err());
    assert!(decoupling_lhs(-0.5, 0.5, 0.5, 0.5).is_err());
}

proptest! {
    #[test]
    fn decoupling_bound_holds(w in proptest::array::uniform4(0.0f64..1.0)) {
        let s: f64 = w.iter().sum();
        prop_assume!(s > 1e-9);
        let [a, b, c, d] = w.map(|x| x / s);
        let l = decoupling_lhs(a, b, c, d).unwrap();
        prop_assert!(l >= (b + c) / 2.0 - 1e-12);
    }
}

fn cut(inst: &Instance, set: &[usize]) -> CutResult {
    let mut b = FixedBitSet::with_capacity(inst.num_vertices());
    for &v in set {
        b.insert(v);
    }
    sparsity(inst, &b).unwrap()
}

#[test]
fn amplify_takes_the_sparsest_sample() {
    let inst = grid_drawing(2, 3).instance(&[(0, 5, 1), (0, 2, 1)]);
    let cuts = [cut(&inst, &[0]), cut(&inst, &[0, 3]), cut(&inst, &[0, 1, 3, 4])];
    let r = amplify(|i| Some(cuts[i % 3].clone()), 3).unwrap();
    let best = cuts.iter().map(|c| c.sparsity).min().unwrap();
    assert_eq!(r.best.sparsity, best);
    assert!(r.best.sparsity.to_f64() <= r.ratio_of_sums() + 1e-12);
    let same = amplify(|_| Some(cuts[1].clone()), 5).unwrap();
    assert_eq!(same.best, cuts[1]);
    assert!(matches!(amplify(|_| None, 4), Err(RoundingError::AllInfinite(40))));
}

#[test]
fn simple_cut_postprocess_returns_a_simple_cut() {
    let inst = grid_drawing(3, 3).instance(&[(0, 8, 1), (2, 6, 1)]);
    let mut u = FixedBitSet::with_capacity(9);
    for v in [0, 2, 6] {
        u.insert(v);
    }
    let c = simple_cut_from_faces(&inst, &u).unwrap();
    let set = c.bitset(9);
    assert!(crate::oracle::is_simple_cut(&inst, &set));
    assert!(c.sparsity < Sparsity::Infinite);
    assert!(simple_cut_from_faces(&inst, &FixedBitSet::with_capacity(9)).is_none());
}

#[test]
fn integral_solutions_round_to_the_encoded_cycle() {
    for inst in [square(1), k4(), grid_drawing(2, 3).instance(&[(0, 5, 1)])] {
        let (dual, tree, profiles) = setup(&inst, 4);
        let model = build_lp(&tree, &dual, &profiles, 0.0).unwrap();
        for c in all_simple_cycles(&dual, 10_000).unwrap() {
            let f = find_amenable_forcing(&tree, c.edges()).unwrap();
            let x = encode_integral(&model, &tree, &profiles, c.enclosed(), &f).unwrap();
            let values: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let plan = RoundingPlan::new(&tree, &profiles, &model, &values, 1e-9);
            let trace = round_topdown(&tree, &plan, &mut stage_rng(1, "t", &[])).unwrap();
            assert!(trace_is_consistent(&tree, &profiles, &trace));
            let got = trace.face_set(dual.num_faces());
            assert_eq!(&got, c.enclosed(), "cycle {:?}", c.edges());
        }
    }
}

/// Empirical frequencies against LP values, `k`-sigma binomial band plus slack.
fn within(freq: f64, p: f64, n: usize, k: f64) -> bool {
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    (freq - p).abs() <= k * sd + 1e-9
}

#[test]
fn rounding_reproduces_marginals_statistically() {
    let inst = grid_drawing(2, 3).instance(&[(0, 5, 3), (2, 3, 2), (1, 4, 1)]);
    let (dual, tree, profiles) = setup(&inst, 2);
    let model = build_lp(&tree, &dual, &profiles, 3.0).unwrap();
    let sol = solve_lp(&model, Solver::Float, 1e-7).unwrap();
    let fractional = (0..model.num_vars())
        .filter(|&i| model.vars[i].is_x() && sol.values[i] > 0.01 && sol.values[i] < 0.99)
        .count();
    assert!(fractional > 0, "fixture LP solved integrally");
    let plan = RoundingPlan::new(&tree, &profiles, &model, &sol.values, 1e-7);
    let trials = 20_000;
    let mut hits: BTreeMap<(NodeId, usize), usize> = BTreeMap::new();
    let mut sep: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..trials {
        let t = round_topdown(&tree, &plan, &mut stage_rng(7, "mc", &[i as u64])).unwrap();
        assert!(trace_is_consistent(&tree, &profiles, &t));
        for (&p, &s) in &t.profile {
            *hits.entry((p, s)).or_default() += 1;
        }
        let u = t.face_set(dual.num_faces());
        for &(a, b) in model.pairs.keys() {
            if u.contains(a) != u.contains(b) {
                *sep.entry((a, b)).or_default() += 1;
            }
        }
    }
    for p in tree.partition_nodes() {
        for s in 0..profiles.get(p).len() {
            let x = sol.values[model.var(&Var::X1 { p, s }).unwrap()].clamp(0.0, 1.0);
            let f = hits.get(&(p, s)).copied().unwrap_or(0) as f64 / trials as f64;
            assert!(within(f, x, trials, 4.0), "x({p},{s}) = {x}, empirical {f}");
        }
    }
    for (&(a, b), info) in &model.pairs {
        let Some(v) = model.var(&Var::Yst { s: a, t: b }) else { continue };
        let y = sol.values[v].clamp(0.0, 1.0);
        let f = sep.get(&(a, b)).copied().unwrap_or(0) as f64 / trials as f64;
        if info.cost > 0 {
            assert!(within(f, y, trials, 4.0), "edge ({a},{b}): y = {y}, empirical {f}");
        }
        if info.demand > 0 {
            let sd = (0.25 / trials as f64).sqrt();
            assert!(f >= 0.5 * y - 4.0 * sd, "demand ({a},{b}): y = {y}, empirical {f}");
        }
    }
}

#[test]
fn pipeline_finds_the_optimum_on_tiny_instances() {
    for inst in [square(1), k4()] {
        let config = PipelineConfig {
            samples: 30,
            oracle: true,
            ..PipelineConfig::default()
        };
        let r = pipeline(&inst, &config).unwrap();
        let opt = brute_force_sparsest(&inst, 16).unwrap().best;
        assert_eq!(r.best.sparsity, opt.sparsity);
        assert_eq!(r.oracle_gap, Some(1.0));
        assert!(crate::oracle::is_simple_cut(&inst, &r.best.bitset(inst.num_vertices())));
    }
}
