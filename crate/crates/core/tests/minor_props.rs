mod common;

use proptest::prelude::*;

use gcmc_core::graph::cut_value;
use gcmc_core::minor::{best_deletion_cut, best_union_cut, contract_part, delete_part, VertexPartition};
use gcmc_core::{Instance, VertexSet};

/// An instance with a random partition of its vertices into `h` labelled
/// parts (empty labels dropped).
fn partitioned(max_n: usize) -> impl Strategy<Value = (Instance, VertexPartition)> {
    common::instance(max_n).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), 1usize..=4, proptest::collection::vec(0usize..4, n)).prop_map(move |(inst, h, labels)| {
            let parts: Vec<VertexSet> = (0..h)
                .map(|p| (0..n).filter(|&v| labels[v] % h == p).collect::<VertexSet>())
                .filter(|s| !s.is_empty())
                .collect();
            let partition = VertexPartition::new(n, parts).unwrap();
            (inst, partition)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contraction_preserves_cuts((inst, p) in partitioned(8), bits in any::<u64>()) {
        let n = inst.n();
        for &part in p.parts() {
            let rest = VertexSet::full(n).difference(part);
            let t = VertexSet::from_bits(bits).intersection(rest);
            let con = contract_part(&inst.graph, &inst.weights, part).unwrap();
            let del = delete_part(&inst.graph, &inst.weights, part).unwrap();
            let m = con.graph.n();
            let with_new = cut_value(&con.weights, con.project(t, true), m).unwrap();
            prop_assert!((with_new - cut_value(&inst.weights, t.union(part), n).unwrap()).abs() < 1e-9);
            let without = cut_value(&del.weights, del.project(t, false), m).unwrap();
            prop_assert!((without - cut_value(&inst.weights, t, n).unwrap()).abs() < 1e-9);
            prop_assert_eq!(con.lift(con.project(t, true)), t.union(part));
            for &(a, b) in con.graph.edges() {
                let (oa, ob) = (con.origin[a], con.origin[b]);
                prop_assert!(oa.iter().any(|u| ob.iter().any(|v| inst.graph.has_edge(u, v))));
            }
        }
    }

    #[test]
    fn deletion_and_union_bounds((inst, p) in partitioned(8), bits in any::<u64>()) {
        let s = VertexSet::from_bits(bits).intersection(VertexSet::full(inst.n()));
        let base = inst.cut(s);
        let factor = 1.0 - 2.0 / p.h() as f64;
        prop_assert!(best_deletion_cut(&inst.weights, &p, s) >= factor * base - 1e-9);
        prop_assert!(best_union_cut(&inst.weights, &p, s) >= factor * base - 1e-9);
    }

    #[test]
    fn contracted_graph_has_no_loops_or_duplicates((inst, p) in partitioned(8)) {
        for &part in p.parts() {
            let con = contract_part(&inst.graph, &inst.weights, part).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for &(a, b) in con.graph.edges() {
                prop_assert!(a < b);
                prop_assert!(seen.insert((a, b)));
            }
            prop_assert_eq!(con.v_new, inst.n() - part.len());
        }
    }
}
