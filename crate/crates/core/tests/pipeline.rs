use pscut::fixtures::{generate, grid_drawing, square_drawing, Family, WeightParams};
use pscut::lp::{build_lp, solve_alpha_sweep, solve_lp, Solver};
use pscut::ndhc::{build_ndhc, NdhcParams};
use pscut::oracle::{brute_force_sparsest, is_simple_cut};
use pscut::planar::{DualGraph, Instance};
use pscut::profiles::enumerate_aplus;
use pscut::reductions::in_range;
use pscut::rng::stage_rng;
use pscut::rounding::{pipeline, PipelineConfig, PipelineError};
use proptest::prelude::*;

fn config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        samples: 40,
        ..PipelineConfig::default()
    }
}

#[test]
fn expensive_edges_go_through_the_guess_loop() {
    let inst = square_drawing(1).instance(&[(0, 2, 1)]);
    let mut file = inst.to_file();
    file.edges[0][2] = 1000;
    let inst = file.build().unwrap();
    assert!(!in_range(&inst));
    let r = pipeline(&inst, &config(2)).unwrap();
    assert!(r.guesses.len() > 1);
    let opt = brute_force_sparsest(&inst, 16).unwrap().best;
    assert_eq!(r.best.sparsity, opt.sparsity);
    assert!(is_simple_cut(&inst, &r.best.bitset(4)));
}

#[test]
fn no_demand_and_bad_face_are_rejected() {
    let inst = grid_drawing(2, 2).instance(&[]);
    assert!(matches!(pipeline(&inst, &config(0)), Err(PipelineError::NoDemand)));
    let inst = grid_drawing(2, 2).instance(&[(0, 3, 1)]);
    let cfg = PipelineConfig { infinite_face: 9, ..config(0) };
    assert!(matches!(pipeline(&inst, &cfg), Err(PipelineError::BadInfiniteFace(9))));
}

#[test]
fn warm_started_sweep_matches_fresh_solves() {
    let inst = grid_drawing(2, 3).instance(&[(0, 5, 3), (2, 3, 2), (1, 4, 1)]);
    let dual = DualGraph::new(&inst, 0).unwrap();
    let tree = build_ndhc(&dual, NdhcParams::new(6, 0.5, 1), None).unwrap();
    let profiles = enumerate_aplus(&tree, &dual, 100_000).unwrap();
    let base = build_lp(&tree, &dual, &profiles, 0.0).unwrap();
    let alphas = [1.0, 2.0, 4.0, 6.0, 7.0];
    for (model, swept) in solve_alpha_sweep(&base, &alphas, Solver::Float, 1e-7) {
        let fresh = solve_lp(&model, Solver::Float, 1e-7);
        match (swept, fresh) {
            (Ok(a), Ok(b)) => assert!((a.objective - b.objective).abs() < 1e-6, "alpha {}", model.alpha),
            (Err(_), Err(_)) => {}
            (a, b) => panic!("alpha {}: {:?} vs {:?}", model.alpha, a.is_ok(), b.is_ok()),
        }
    }
}

#[test]
fn instance_files_round_trip() {
    let mut rng = stage_rng(5, "it", &[]);
    let inst = generate(Family::RandomPlanar { rows: 3, cols: 3, keep: 13 }, WeightParams::default(), &mut rng).unwrap();
    let back = Instance::from_json(&inst.to_json()).unwrap();
    assert_eq!(back.to_file(), inst.to_file());
    assert!(Instance::from_json(&inst.to_json().replacen("\"n\"", "\"m\": 1, \"n\"", 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn pipeline_returns_a_reproducible_simple_cut(seed in 0u64..1000, rim in 3usize..6) {
        let mut rng = stage_rng(seed, "prop", &[]);
        let inst = generate(Family::Wheel { rim }, WeightParams::default(), &mut rng).unwrap();
        let a = pipeline(&inst, &config(seed)).unwrap();
        let b = pipeline(&inst, &config(seed)).unwrap();
        prop_assert_eq!(&a.best, &b.best);
        let n = inst.num_vertices();
        prop_assert!(is_simple_cut(&inst, &a.best.bitset(n)));
        let opt = brute_force_sparsest(&inst, 16).unwrap().best;
        prop_assert!(a.best.sparsity >= opt.sparsity);
        let ratio = a.best.sparsity.ratio_to(&opt.sparsity).unwrap();
        prop_assert!(ratio <= 3.0, "ratio {}", ratio);
    }
}
