//! A fixed collection of small instances with seeded weights, covering
//! paths, cycles, trees, series-parallel graphs and a 2×3 grid under all
//! four constraints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Constraint, ConstraintGraph, Instance, Vertex, WeightFunction};

#[derive(Clone, Debug)]
pub struct CorpusInstance {
    pub name: String,
    pub instance: Instance,
}

/// Weights on a random subset of all vertex pairs: each pair is kept with
/// probability `density` and weighted uniformly in `[0.1, 1]`, rounded to
/// three decimals.
pub fn seeded_weights(n: usize, seed: u64, density: f64) -> WeightFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                let w: f64 = rng.gen_range(0.1..=1.0);
                triples.push((u, v, (w * 1000.0).round() / 1000.0));
            }
        }
    }
    WeightFunction::new(n, triples).expect("generated weights are valid")
}

pub fn grid(rows: usize, cols: usize) -> ConstraintGraph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    ConstraintGraph::new(rows * cols, edges).unwrap()
}

fn graph(n: usize, edges: &[(Vertex, Vertex)]) -> ConstraintGraph {
    ConstraintGraph::new(n, edges.iter().copied()).unwrap()
}

/// Graph families used by the corpus, by name.
fn graphs() -> Vec<(&'static str, ConstraintGraph)> {
    vec![
        ("path5", ConstraintGraph::path(5).unwrap()),
        ("path7", ConstraintGraph::path(7).unwrap()),
        ("cycle4", ConstraintGraph::cycle(4).unwrap()),
        ("cycle5", ConstraintGraph::cycle(5).unwrap()),
        ("cycle6", ConstraintGraph::cycle(6).unwrap()),
        ("star4", graph(4, &[(0, 1), (0, 2), (0, 3)])),
        ("star6", graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)])),
        ("spider7", graph(7, &[(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)])),
        ("bintree7", graph(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])),
        ("diamond", graph(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])),
        ("sp6", graph(6, &[(0, 1), (1, 2), (2, 5), (0, 3), (3, 4), (4, 5), (1, 4)])),
        ("grid2x3", grid(2, 3)),
        ("wheel5", graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (4, 1)])),
    ]
}

/// The certification corpus. Names are `<graph>-<constraint>`.
pub fn corpus() -> Vec<CorpusInstance> {
    let plan: &[(&str, Constraint)] = &[
        ("path5", Constraint::IndependentSet),
        ("path7", Constraint::VertexCover),
        ("path5", Constraint::Connectivity),
        ("path5", Constraint::DominatingSet),
        ("cycle5", Constraint::IndependentSet),
        ("cycle6", Constraint::VertexCover),
        ("cycle5", Constraint::Connectivity),
        ("cycle4", Constraint::DominatingSet),
        ("star6", Constraint::IndependentSet),
        ("bintree7", Constraint::VertexCover),
        ("spider7", Constraint::Connectivity),
        ("star4", Constraint::DominatingSet),
        ("grid2x3", Constraint::IndependentSet),
        ("grid2x3", Constraint::VertexCover),
        ("grid2x3", Constraint::Connectivity),
        ("cycle5", Constraint::DominatingSet),
        ("diamond", Constraint::IndependentSet),
        ("sp6", Constraint::VertexCover),
        ("sp6", Constraint::Connectivity),
        ("diamond", Constraint::DominatingSet),
        ("wheel5", Constraint::IndependentSet),
        ("wheel5", Constraint::Connectivity),
    ];
    let all = graphs();
    plan.iter()
        .enumerate()
        .map(|(k, &(gname, c))| {
            let g = all.iter().find(|(n, _)| *n == gname).unwrap().1.clone();
            let weights = seeded_weights(g.n(), 1000 + k as u64, 0.6);
            CorpusInstance {
                name: format!("{gname}-{}", c.name()),
                instance: Instance::new(g, weights, c).unwrap(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::build_tree_decomposition;

    #[test]
    fn corpus_shape() {
        let c = corpus();
        assert!(c.len() >= 20);
        for inst in &c {
            assert!(inst.instance.n() <= 9);
            assert!(build_tree_decomposition(&inst.instance.graph).width() <= 3);
        }
        for con in Constraint::ALL {
            assert!(c.iter().filter(|i| i.instance.constraint == con).count() >= 4);
        }
        let mut names: Vec<_> = c.iter().map(|i| i.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), c.len());
    }

    #[test]
    fn weights_are_reproducible() {
        assert_eq!(seeded_weights(6, 3, 0.5), seeded_weights(6, 3, 0.5));
        assert!(seeded_weights(6, 3, 1.0).entries().count() == 15);
    }
}
