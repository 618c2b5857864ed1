//! Fixtures shared by the benchmarks.

use gcmc_core::corpus::{corpus, CorpusInstance};

/// One corpus instance per constraint, small enough that every stage runs in
/// milliseconds.
pub const FIXTURES: [&str; 4] =
    ["grid2x3-independent-set", "bintree7-vertex-cover", "cycle5-dominating-set", "grid2x3-connectivity"];

pub fn fixtures() -> Vec<CorpusInstance> {
    let all = corpus();
    FIXTURES
        .iter()
        .map(|name| all.iter().find(|c| c.name == *name).cloned().expect("fixture is in the corpus"))
        .collect()
}
