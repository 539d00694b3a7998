use num_rational::BigRational;

use super::*;
use crate::fixtures::{grid_drawing, k4, square, wheel_drawing};
use crate::ndhc::{build_ndhc, find_amenable_forcing, NdhcParams};
use crate::oracle::all_simple_cycles;
use crate::planar::Instance;
use crate::profiles::enumerate_aplus;

struct Setup {
    dual: DualGraph,
    tree: NdhcTree,
    profiles: Profiles,
}

fn setup(inst: &Instance, seed: u64) -> Setup {
    let dual = DualGraph::new(inst, 0).unwrap();
    let n = inst.graph.num_vertices();
    let tree = build_ndhc(&dual, NdhcParams::new(n, 0.5, seed), None).unwrap();
    let profiles = enumerate_aplus(&tree, &dual, 100_000).unwrap();
    Setup { dual, tree, profiles }
}

fn small() -> Vec<Instance> {
    vec![
        square(1),
        k4(),
        grid_drawing(2, 3).instance(&[(0, 5, 2), (1, 4, 1)]),
        wheel_drawing(4).instance(&[(1, 3, 1)]),
    ]
}

#[test]
fn every_amenable_cycle_encodes_to_an_exactly_feasible_point() {
    for inst in small() {
        let s = setup(&inst, 3);
        let model = build_lp(&s.tree, &s.dual, &s.profiles, 0.0).unwrap();
        for c in all_simple_cycles(&s.dual, 10_000).unwrap() {
            let Some(f) = find_amenable_forcing(&s.tree, c.edges()) else {
                continue;
            };
            let sep = s.dual.demands().separated(c.enclosed()) as f64;
            let m = model.with_alpha(sep);
            let x = encode_integral(&m, &s.tree, &s.profiles, c.enclosed(), &f).unwrap();
            let q: Vec<BigRational> = x.iter().map(|&v| BigRational::from_integer(v.into())).collect();
            let bad = residuals_exact(&m, &q);
            assert!(bad.is_empty(), "cycle {:?}: rows {:?}", c.edges(), bad);
            let cost: i64 = (0..m.num_vars()).map(|i| m.objective[i] as i64 * x[i]).sum();
            assert_eq!(cost as u128, c.cost(&s.dual));
        }
    }
}

#[test]
fn encoded_separation_matches_the_cycle() {
    let inst = grid_drawing(2, 3).instance(&[(0, 5, 1)]);
    let s = setup(&inst, 1);
    let model = build_lp(&s.tree, &s.dual, &s.profiles, 0.0).unwrap();
    for c in all_simple_cycles(&s.dual, 10_000).unwrap() {
        let f = find_amenable_forcing(&s.tree, c.edges()).unwrap();
        let x = encode_integral(&model, &s.tree, &s.profiles, c.enclosed(), &f).unwrap();
        for &(a, b) in model.pairs.keys() {
            if let Some(v) = model.var(&Var::Yst { s: a, t: b }) {
                let sep = c.enclosed().contains(a) != c.enclosed().contains(b);
                assert_eq!(x[v], sep as i64);
            }
        }
    }
}

#[test]
fn relaxation_is_below_every_encoding_and_solvers_agree() {
    for inst in small() {
        let s = setup(&inst, 5);
        let total = s.dual.demands().total() as f64;
        let base = build_lp(&s.tree, &s.dual, &s.profiles, 0.0).unwrap();
        for alpha in [1.0, total] {
            let m = base.with_alpha(alpha);
            let float = solve_lp(&m, Solver::Float, 1e-7).unwrap();
            if m.num_vars() <= 300 {
                let exact = solve_lp(&m, Solver::Exact, 1e-9).unwrap();
                assert!((exact.objective - float.objective).abs() <= 1e-6 * (1.0 + exact.objective));
            }
            for c in all_simple_cycles(&s.dual, 10_000).unwrap() {
                if (s.dual.demands().separated(c.enclosed()) as f64) < alpha {
                    continue;
                }
                if find_amenable_forcing(&s.tree, c.edges()).is_some() {
                    assert!(float.objective <= c.cost(&s.dual) as f64 + 1e-6);
                }
            }
        }
    }
}

#[test]
fn alpha_above_total_demand_is_infeasible() {
    let inst = square(1);
    let s = setup(&inst, 1);
    let total = s.dual.demands().total() as f64;
    let m = build_lp(&s.tree, &s.dual, &s.profiles, total + 0.5).unwrap();
    assert!(matches!(solve_lp(&m, Solver::Exact, 1e-9), Err(LpError::Infeasible)));
    assert!(matches!(solve_lp(&m, Solver::Float, 1e-7), Err(LpError::Infeasible)));
}

#[test]
fn square_relaxation_matches_the_optimal_cut() {
    // Demand (0, 2) across the 4-cycle: every separating cut costs 2.
    let s = setup(&square(1), 2);
    let m = build_lp(&s.tree, &s.dual, &s.profiles, 1.0).unwrap();
    let sol = solve_lp(&m, Solver::Exact, 1e-9).unwrap();
    assert!((sol.objective - 2.0).abs() < 1e-9, "objective {}", sol.objective);
    let root = m.var(&Var::X1 { p: 0, s: 0 }).unwrap();
    assert_eq!(sol.values[root], 1.0);
}

#[test]
fn export_lists_every_row_and_bound() {
    let s = setup(&square(1), 2);
    let m = build_lp(&s.tree, &s.dual, &s.profiles, 1.0).unwrap();
    let text = to_lp_format(&m);
    assert!(text.starts_with("\\ "));
    assert!(text.matches(" r").count() >= m.num_rows());
    assert_eq!(text.lines().filter(|l| l.contains("<= v") || l.ends_with(">= 0")).count(), m.num_vars());
    assert!(text.ends_with("End\n"));
}

#[test]
fn alpha_grid_is_geometric() {
    let g = alpha_grid(0.5, 1.0, 10.0);
    assert_eq!(g.len(), 6);
    assert!((g[5] - 7.59375).abs() < 1e-12);
}
