use super::*;
use crate::fixtures::{grid_drawing, k4, square};
use crate::oracle::all_simple_cycles;
use crate::planar::Instance;

fn dual(inst: &Instance) -> DualGraph {
    DualGraph::new(inst, 0).unwrap()
}

fn grid(r: usize, c: usize) -> Instance {
    grid_drawing(r, c).instance(&[(0, r * c - 1, 1)])
}

#[test]
fn square_tree_is_valid() {
    let d = dual(&square(1));
    let t = build_ndhc(&d, NdhcParams::new(4, 0.5, 1), None).unwrap();
    t.check_invariants().unwrap();
    assert_eq!(t.node(0).children.len(), 1);
}

#[test]
fn every_dual_cycle_of_small_graphs_has_a_forcing() {
    for inst in [square(1), k4(), grid(2, 3)] {
        let d = dual(&inst);
        let n = inst.graph.num_vertices();
        let t = build_ndhc(&d, NdhcParams::new(n, 0.5, 7), None).unwrap();
        t.check_invariants().unwrap();
        let cycles = all_simple_cycles(&d, 10_000).unwrap();
        for c in &cycles {
            let f = find_amenable_forcing(&t, c.edges());
            let f = f.unwrap_or_else(|| panic!("no forcing for {:?}\n{}", c.edges(), t.dump()));
            assert!(f.is_amenable(&t, c.edges()).unwrap());
        }
    }
}

#[test]
fn grid_tree_is_valid_and_deterministic() {
    let inst = grid(3, 4);
    let d = dual(&inst);
    let a = build_ndhc(&d, NdhcParams::new(12, 0.5, 3), None).unwrap();
    let b = build_ndhc(&d, NdhcParams::new(12, 0.5, 3), None).unwrap();
    a.check_invariants().unwrap();
    assert_eq!(a.dump(), b.dump());
}

#[test]
fn boundary_plus_is_union_of_boundaries_on_the_path() {
    let inst = grid(3, 4);
    let d = dual(&inst);
    let t = build_ndhc(&d, NdhcParams::new(12, 0.5, 5), None).unwrap();
    for p in t.partition_nodes() {
        let mut union = FixedBitSet::with_capacity(t.num_faces());
        let mut total = 0;
        for q in t.partn_path(p) {
            total += t.boundary(q).count_ones(..);
            union.union_with(t.boundary(q));
        }
        assert_eq!(&union, t.boundary_plus(p), "node {p}");
        assert_eq!(total, union.count_ones(..), "boundaries overlap at {p}");
    }
}

#[test]
fn lca_and_ancestry_agree() {
    let d = dual(&grid(2, 3));
    let t = build_ndhc(&d, NdhcParams::new(6, 0.5, 2), None).unwrap();
    for x in 0..t.len() {
        for y in 0..t.len() {
            let l = t.lca(x, y);
            assert!(t.is_ancestor(l, x) && t.is_ancestor(l, y));
            for &ch in &t.node(l).children {
                assert!(!(t.is_ancestor(ch, x) && t.is_ancestor(ch, y)));
            }
        }
    }
}

#[test]
fn strict_mode_reports_caps() {
    let d = dual(&grid(3, 4));
    let mut params = NdhcParams::new(12, 0.5, 3);
    params.cap_partitions = 1;
    params.strict = true;
    assert!(matches!(
        build_ndhc(&d, params, None),
        Err(NdhcError::CapExceeded(CapKind::Partitions, _))
    ));
}
