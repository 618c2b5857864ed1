//! The state spaces against brute force: every valid assignment reassembles
//! into a feasible set, and every feasible set arises from exactly the
//! assignment `states_of_solution` returns.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use gcmc_core::corpus::corpus;
use gcmc_core::decomp::{build_tree_decomposition, validate_tree_decomposition};
use gcmc_core::oracle::{brute_force_linear, feasible_sets};
use gcmc_core::{ConstraintDp, ConstraintGraph, Constraint, StateAssignment, VertexSet};

/// All assignments that follow the combination rules from a live root state
/// down to feasible leaves.
fn valid_assignments(dp: &ConstraintDp) -> Vec<StateAssignment> {
    let td = dp.td();
    let order = td.bfs_order().to_vec();
    let mut out = Vec::new();
    let mut a = vec![usize::MAX; td.len()];

    fn rec(dp: &ConstraintDp, order: &[usize], t: usize, a: &mut Vec<usize>, out: &mut Vec<StateAssignment>) {
        let td = dp.td();
        if t == order.len() {
            out.push(StateAssignment::new(a.clone()));
            return;
        }
        let i = order[t];
        match td.child_pair(i) {
            None => {
                if dp.leaf_feasible(i, a[i]).unwrap() {
                    rec(dp, order, t + 1, a, out);
                }
            }
            Some((j1, j2)) => {
                for &(x, y) in dp.child_combos(i, a[i]).unwrap() {
                    a[j1] = x;
                    a[j2] = y;
                    rec(dp, order, t + 1, a, out);
                }
            }
        }
    }

    for k in 0..dp.num_states(td.root()) {
        a[td.root()] = k;
        rec(dp, &order, 0, &mut a, &mut out);
    }
    out
}

fn check_semantics(g: &ConstraintGraph, c: Constraint) -> Result<(), TestCaseError> {
    let td = build_tree_decomposition(g);
    prop_assert!(validate_tree_decomposition(g, &td));
    let dp = ConstraintDp::new(g, &td, c).unwrap();
    let feasible: BTreeSet<VertexSet> = feasible_sets(g, c).unwrap().into_iter().collect();

    let mut produced = BTreeSet::new();
    for b in valid_assignments(&dp) {
        let r = dp.reassemble(&b).unwrap();
        prop_assert!(feasible.contains(&r), "valid assignment {:?} gives infeasible {}", b, r);
        produced.insert(r);
    }
    prop_assert_eq!(&produced, &feasible);

    for &s in &feasible {
        let b = dp.states_of_solution(s).unwrap();
        prop_assert_eq!(dp.reassemble(&b).unwrap(), s);
        for i in td.nodes() {
            prop_assert!(dp.is_usable(i, b.get(i)));
        }
    }
    Ok(())
}

#[test]
fn corpus_state_spaces_match_brute_force() {
    for c in corpus() {
        check_semantics(&c.instance.graph, c.instance.constraint).unwrap_or_else(|e| panic!("{}: {e}", c.name));
    }
}

#[test]
fn infeasible_sets_have_no_state_vector() {
    let g = ConstraintGraph::path(4).unwrap();
    let td = build_tree_decomposition(&g);
    let dp = ConstraintDp::new(&g, &td, Constraint::IndependentSet).unwrap();
    assert!(dp.states_of_solution([1, 2].into_iter().collect()).is_err());
    let dp = ConstraintDp::new(&g, &td, Constraint::Connectivity).unwrap();
    assert!(dp.states_of_solution([0, 3].into_iter().collect()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_state_spaces_match_brute_force(g in common::sparse_graph(7), c in common::constraint()) {
        check_semantics(&g, c)?;
    }

    #[test]
    fn linear_objective_matches_brute_force(
        g in common::sparse_graph(8),
        c in common::constraint(),
        f in proptest::collection::vec(-16i32..=16, 8),
    ) {
        let f: Vec<f64> = f[..g.n()].iter().map(|&x| x as f64 / 4.0).collect();
        let td = build_tree_decomposition(&g);
        let dp = ConstraintDp::new(&g, &td, c).unwrap();
        let (s, value) = dp.solve_linear_objective(&f).unwrap();
        let (_, best) = brute_force_linear(&g, c, &f).unwrap();
        prop_assert_eq!(value, best);
        prop_assert!(gcmc_core::graph::is_feasible(&g, c, s));
    }
}
