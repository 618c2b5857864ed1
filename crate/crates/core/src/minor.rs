//! The partition meta-algorithm for minor-free graphs. The vertex partition
//! is an input. For each part the instance is reduced to a smaller one,
//! solved with the LP pipeline, and mapped back; the best part wins.

use serde::{Deserialize, Serialize};

use crate::error::{GcmcError, Result};
use crate::graph::{cut_value_unchecked, Constraint, ConstraintGraph, Instance, Vertex, VertexSet, WeightFunction};
use crate::pipeline::{solve_fixing, PipelineConfig, RootFix, SolvedInstance};

/// Disjoint non-empty parts covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexPartition {
    parts: Vec<VertexSet>,
}

impl VertexPartition {
    pub fn new(n: usize, parts: Vec<VertexSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(GcmcError::InvalidPartition("no parts".into()));
        }
        let mut seen = VertexSet::EMPTY;
        for (k, &p) in parts.iter().enumerate() {
            if p.is_empty() {
                return Err(GcmcError::InvalidPartition(format!("part {k} is empty")));
            }
            if let Some(v) = p.iter().find(|&v| v >= n) {
                return Err(GcmcError::VertexOutOfRange { vertex: v, n });
            }
            if !p.is_disjoint(seen) {
                return Err(GcmcError::InvalidPartition(format!("part {k} overlaps an earlier part")));
            }
            seen = seen.union(p);
        }
        if seen != VertexSet::full(n) {
            let missing = VertexSet::full(n).difference(seen);
            return Err(GcmcError::InvalidPartition(format!("vertices {missing} are in no part")));
        }
        Ok(VertexPartition { parts })
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn h(&self) -> usize {
        self.parts.len()
    }
}

/// `G` with one part replaced by the single vertex `v_new`, the last vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractedInstance {
    pub graph: ConstraintGraph,
    pub weights: WeightFunction,
    pub v_new: Vertex,
    /// Original vertices behind each vertex of the contracted graph.
    pub origin: Vec<VertexSet>,
}

impl ContractedInstance {
    /// Original vertex set represented by `t`.
    pub fn lift(&self, t: VertexSet) -> VertexSet {
        t.iter().fold(VertexSet::EMPTY, |acc, x| acc.union(self.origin[x]))
    }

    fn position_of(&self, original: Vertex) -> Vertex {
        self.origin.iter().position(|o| o.contains(original)).expect("vertex is represented")
    }

    /// Contracted-graph set representing `s ⊆ V ∖ V_i` (plus `v_new` when
    /// `with_new`).
    pub fn project(&self, s: VertexSet, with_new: bool) -> VertexSet {
        let mut t: VertexSet = s.iter().map(|u| self.position_of(u)).collect();
        if with_new {
            t.insert(self.v_new);
        }
        t
    }
}

fn reduced(g: &ConstraintGraph, c: &WeightFunction, part: VertexSet, keep_edges: bool) -> Result<ContractedInstance> {
    if part.is_empty() {
        return Err(GcmcError::InvalidPartition("cannot contract an empty part".into()));
    }
    let n = g.n();
    if let Some(v) = part.iter().find(|&v| v >= n) {
        return Err(GcmcError::VertexOutOfRange { vertex: v, n });
    }
    let rest = VertexSet::full(n).difference(part).to_vec();
    let v_new = rest.len();
    let mut map = vec![v_new; n];
    for (k, &u) in rest.iter().enumerate() {
        map[u] = k;
    }
    let mut origin: Vec<VertexSet> = rest.iter().map(|&u| VertexSet::singleton(u)).collect();
    origin.push(part);

    let edges = g
        .edges()
        .iter()
        .map(|&(u, v)| (map[u], map[v]))
        .filter(|&(a, b)| a != b && (keep_edges || (a != v_new && b != v_new)))
        .map(|(a, b)| (a.min(b), a.max(b)));
    let mut edges: Vec<_> = edges.collect();
    edges.sort_unstable();
    edges.dedup();
    let graph = ConstraintGraph::new(v_new + 1, edges)?;

    let mut agg = vec![vec![0.0; v_new + 1]; v_new + 1];
    for ((u, v), w) in c.entries() {
        let (a, b) = (map[u], map[v]);
        if a != b {
            agg[a.min(b)][a.max(b)] += w;
        }
    }
    let triples = (0..=v_new).flat_map(|a| (a + 1..=v_new).map(move |b| (a, b))).filter_map(|(a, b)| {
        let w = agg[a][b];
        (w != 0.0).then_some((a, b, w))
    });
    let weights = WeightFunction::new(v_new + 1, triples.collect::<Vec<_>>())?;
    Ok(ContractedInstance { graph, weights, v_new, origin })
}

/// Contract `part` to a new vertex. Edges into the part are redirected to
/// `v_new`, loops dropped, parallel edges merged; `c_i(u, v_new)` is the
/// total weight from `u` into the part.
pub fn contract_part(g: &ConstraintGraph, c: &WeightFunction, part: VertexSet) -> Result<ContractedInstance> {
    reduced(g, c, part, true)
}

/// `G[V ∖ part]` plus an isolated stand-in vertex for the part, carrying
/// the aggregated weights so that cuts of sets avoiding the stand-in match
/// cuts in the original instance.
pub fn delete_part(g: &ConstraintGraph, c: &WeightFunction, part: VertexSet) -> Result<ContractedInstance> {
    reduced(g, c, part, false)
}

/// `max_i c(δ(S ∖ V_i))`.
pub fn best_deletion_cut(c: &WeightFunction, partition: &VertexPartition, s: VertexSet) -> f64 {
    partition.parts().iter().map(|&p| cut_value_unchecked(c, s.difference(p))).fold(f64::NEG_INFINITY, f64::max)
}

/// `max_i c(δ(S ∪ V_i))`.
pub fn best_union_cut(c: &WeightFunction, partition: &VertexPartition, s: VertexSet) -> f64 {
    partition.parts().iter().map(|&p| cut_value_unchecked(c, s.union(p))).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug)]
pub struct Algorithm2Config {
    pub pipeline: PipelineConfig,
    pub seed: u64,
    /// Runs used when a sub-instance's distribution is not enumerable.
    pub fallback_runs: u64,
}

impl Default for Algorithm2Config {
    fn default() -> Self {
        Algorithm2Config { pipeline: PipelineConfig::default(), seed: 0, fallback_runs: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartValueKind {
    ExactExpectation,
    BestOfRuns,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartReport {
    pub index: usize,
    pub part: Vec<Vertex>,
    pub sub_vertices: usize,
    pub lp_value: f64,
    pub value: f64,
    pub value_kind: PartValueKind,
    pub solution: Vec<Vertex>,
    pub cut_value: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Algorithm2Report {
    pub h: usize,
    pub parts: Vec<PartReport>,
    pub chosen_part: usize,
    pub solution: Vec<Vertex>,
    pub cut_value: f64,
    /// Value of the winning part.
    pub best_value: f64,
    /// `½(1 − 2/h)`.
    pub guarantee_factor: f64,
}

/// Run the meta-algorithm. Independent set deletes each part; vertex cover
/// and dominating set contract it and force the contracted vertex.
pub fn algorithm2(instance: &Instance, partition: &VertexPartition, config: &Algorithm2Config) -> Result<(VertexSet, Algorithm2Report)> {
    let (g, c) = (&instance.graph, &instance.weights);
    if partition.parts().iter().any(|p| p.iter().any(|v| v >= g.n())) || partition.parts().iter().fold(VertexSet::EMPTY, |a, &p| a.union(p)) != g.vertices() {
        return Err(GcmcError::InvalidPartition("partition does not cover the instance vertices".into()));
    }
    let deleting = match instance.constraint {
        Constraint::IndependentSet => true,
        Constraint::VertexCover | Constraint::DominatingSet => false,
        Constraint::Connectivity => return Err(GcmcError::UnsupportedConstraint(instance.constraint.name().into())),
    };
    let mut parts = Vec::new();
    let mut best: Option<(usize, f64, VertexSet)> = None;
    for (index, &part) in partition.parts().iter().enumerate() {
        let sub = if deleting { delete_part(g, c, part)? } else { contract_part(g, c, part)? };
        let sub_instance = Instance::new(sub.graph.clone(), sub.weights.clone(), instance.constraint)?;
        let fix = if deleting { RootFix::Exclude(sub.v_new) } else { RootFix::Force(sub.v_new) };
        let solved = solve_fixing(&sub_instance, fix, &config.pipeline)?;
        let (value, value_kind, t) = part_value(&solved, config)?;
        let s = if deleting { sub.lift(t).difference(part) } else { sub.lift(t) };
        let cut = instance.cut(s);
        debug_assert!((cut - sub_instance.cut(t)).abs() < 1e-9);
        parts.push(PartReport {
            index,
            part: part.to_vec(),
            sub_vertices: sub.graph.n(),
            lp_value: solved.lp_value,
            value,
            value_kind,
            solution: s.to_vec(),
            cut_value: cut,
            feasible: instance.is_feasible(s),
        });
        if best.as_ref().is_none_or(|&(_, b, _)| value > b) {
            best = Some((index, value, s));
        }
    }
    let (chosen_part, best_value, s) = best.expect("at least one part");
    let h = partition.h();
    let report = Algorithm2Report {
        h,
        parts,
        chosen_part,
        solution: s.to_vec(),
        cut_value: instance.cut(s),
        best_value,
        guarantee_factor: 0.5 * (1.0 - 2.0 / h as f64),
    };
    Ok((s, report))
}

fn part_value(solved: &SolvedInstance, config: &Algorithm2Config) -> Result<(f64, PartValueKind, VertexSet)> {
    let weights = &solved.instance.weights;
    match solved.plan.exact_distribution(&solved.dp, config.pipeline.enumeration_cap) {
        Ok(dist) => {
            let run = solved.plan.round_once(&solved.dp, config.seed);
            Ok((dist.expected_cut(weights), PartValueKind::ExactExpectation, run.result))
        }
        Err(GcmcError::EnumerationCap { .. }) => {
            let mut best: Option<(f64, VertexSet)> = None;
            for k in 0..config.fallback_runs.max(1) {
                let r = solved.plan.round_once(&solved.dp, config.seed.wrapping_add(k)).result;
                let v = cut_value_unchecked(weights, r);
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, r));
                }
            }
            let (v, r) = best.unwrap();
            Ok((v, PartValueKind::BestOfRuns, r))
        }
        Err(e) => Err(e),
    }
}
