#![allow(dead_code)]

use proptest::prelude::*;

use gcmc_core::{Constraint, ConstraintGraph, Instance, WeightFunction};

/// A random tree on `n` vertices plus up to two chords, so the decomposition
/// stays narrow.
pub fn sparse_graph(max_n: usize) -> impl Strategy<Value = ConstraintGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let parents = proptest::collection::vec(any::<prop::sample::Index>(), n.saturating_sub(1));
        let chords = proptest::collection::vec((0..n, 0..n), 0..=2);
        (Just(n), parents, chords).prop_map(|(n, parents, chords)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(k, p)| (p.index(k + 1), k + 1)).collect();
            edges.extend(chords.into_iter().filter(|(a, b)| a != b));
            let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            edges.sort_unstable();
            edges.dedup();
            ConstraintGraph::new(n, edges).unwrap()
        })
    })
}

pub fn constraint() -> impl Strategy<Value = Constraint> {
    prop::sample::select(Constraint::ALL.to_vec())
}

/// Weights on a random subset of pairs, in eighths so sums are exact.
pub fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (sparse_graph(max_n), constraint()).prop_flat_map(|(g, c)| {
        let n = g.n();
        let pairs = n * n.saturating_sub(1) / 2;
        proptest::collection::vec(prop::option::weighted(0.6, 1u32..=8), pairs).prop_map(move |ws| {
            let mut triples = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if let Some(w) = ws[k] {
                        triples.push((u, v, w as f64 / 8.0));
                    }
                    k += 1;
                }
            }
            Instance::new(g.clone(), WeightFunction::new(n, triples).unwrap(), c).unwrap()
        })
    })
}
