//! Per-node dynamic-programming state spaces for the four constraints.
//!
//! For every node `i` the DP exposes an ordered state space `Σ_i`, the
//! vertex set `X_{i,σ}` that each state commits to, the valid child
//! combinations `ℱ_{i,σ}` of internal nodes and a feasibility flag for
//! leaves. States are identified by their index into `Σ_i`.
//!
//! Connectivity carries one state beyond the `(B, P)` pairs: at every
//! internal node [`DpState::ConnectedClosed`] stands for a non-empty
//! connected solution lying strictly below the node's bag. Without it a
//! connected set avoiding the root bag would have no representation.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::decomp::{NodeId, TreeDecomposition};
use crate::error::{GcmcError, Result};
use crate::graph::{closed_neighborhood, is_feasible, Constraint, ConstraintGraph, Vertex, VertexSet};

pub const DEFAULT_STATE_CAP: usize = 5000;
pub const STATE_CAP_ENV: &str = "GCMC_STATE_CAP";

/// Largest bag for which subset enumeration is attempted at all.
const MAX_ENUMERATED_BAG: usize = 24;

/// State cap from `GCMC_STATE_CAP`, falling back to [`DEFAULT_STATE_CAP`].
pub fn state_cap_from_env() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// A partition of a vertex set into disjoint non-empty parts, stored with
/// parts ordered by their smallest vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Partition(Vec<VertexSet>);

impl Partition {
    pub fn new(parts: impl IntoIterator<Item = VertexSet>) -> Result<Self> {
        let mut seen = VertexSet::EMPTY;
        let mut out = Vec::new();
        for p in parts {
            if p.is_empty() {
                return Err(GcmcError::InvalidPartition("empty part".into()));
            }
            if !p.is_disjoint(seen) {
                return Err(GcmcError::InvalidPartition("parts overlap".into()));
            }
            seen = seen.union(p);
            out.push(p);
        }
        out.sort_by_key(|p| p.first());
        Ok(Partition(out))
    }

    /// `{B}`, or the empty partition when `B = ∅`.
    pub fn single(b: VertexSet) -> Self {
        if b.is_empty() {
            Partition(Vec::new())
        } else {
            Partition(vec![b])
        }
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ground(&self) -> VertexSet {
        self.0.iter().fold(VertexSet::EMPTY, |a, &p| a.union(p))
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.canonical_cmp(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// True iff every pair of elements sharing a part of `target` is joined by
/// the transitive closure of co-membership across the parts of `by`.
pub fn partition_satisfied(target: &Partition, by: &[Partition]) -> bool {
    satisfied_by_parts(target.parts(), by.iter().flat_map(|p| p.parts().iter().copied()))
}

fn satisfied_by_parts(target: &[VertexSet], parts: impl Iterator<Item = VertexSet>) -> bool {
    let mut groups: Vec<VertexSet> = Vec::new();
    for p in parts {
        let mut merged = p;
        groups.retain(|&g| {
            if g.is_disjoint(merged) {
                true
            } else {
                merged = merged.union(g);
                false
            }
        });
        groups.push(merged);
    }
    target
        .iter()
        .all(|&t| t.len() <= 1 || groups.iter().any(|&g| t.is_subset(g)))
}

/// All set partitions of `b`, each with parts ordered by smallest vertex.
fn set_partitions(b: VertexSet) -> Vec<Partition> {
    fn rec(elems: &[Vertex], blocks: &mut Vec<VertexSet>, out: &mut Vec<Partition>) {
        let Some((&e, rest)) = elems.split_first() else {
            out.push(Partition(blocks.clone()));
            return;
        };
        for k in 0..blocks.len() {
            blocks[k].insert(e);
            rec(rest, blocks, out);
            blocks[k].remove(e);
        }
        blocks.push(VertexSet::singleton(e));
        rec(rest, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(&b.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn bell(k: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// One DP state. The derived equality is structural; ordering is the
/// canonical one used for state indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DpState {
    /// Independent set or vertex cover: the chosen subset of the bag.
    Subset(VertexSet),
    /// Connectivity: chosen bag vertices and the pattern they must be joined in.
    Connected { members: VertexSet, parts: Partition },
    /// Connectivity: a non-empty connected solution strictly below the bag.
    ConnectedClosed,
    /// Dominating set: chosen bag vertices and bag vertices excused from
    /// domination inside the subtree.
    Dominating { members: VertexSet, excused: VertexSet },
}

impl DpState {
    /// `X_{i,σ}`.
    pub fn required_set(&self) -> VertexSet {
        match self {
            DpState::Subset(s) => *s,
            DpState::Connected { members, .. } | DpState::Dominating { members, .. } => *members,
            DpState::ConnectedClosed => VertexSet::EMPTY,
        }
    }

    fn rank(&self) -> u8 {
        matches!(self, DpState::ConnectedClosed) as u8
    }

    fn is_empty_connected(&self) -> bool {
        matches!(self, DpState::Connected { members, .. } if members.is_empty())
    }
}

impl Ord for DpState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (DpState::Subset(a), DpState::Subset(b)) => a.canonical_cmp(b),
            (DpState::Connected { members: a, parts: p }, DpState::Connected { members: b, parts: q }) => {
                a.canonical_cmp(b).then_with(|| p.canonical_cmp(q))
            }
            (
                DpState::Dominating { members: a, excused: y },
                DpState::Dominating { members: b, excused: z },
            ) => a.canonical_cmp(b).then_with(|| y.canonical_cmp(z)),
            (DpState::ConnectedClosed, DpState::ConnectedClosed) => Ordering::Equal,
            _ => discriminant_index(self).cmp(&discriminant_index(other)),
        })
    }
}

fn discriminant_index(s: &DpState) -> u8 {
    match s {
        DpState::Subset(_) => 0,
        DpState::Connected { .. } => 1,
        DpState::ConnectedClosed => 2,
        DpState::Dominating { .. } => 3,
    }
}

impl PartialOrd for DpState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DpState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpState::Subset(s) => write!(f, "{s}"),
            DpState::Connected { members, parts } => write!(f, "{members}|{parts}"),
            DpState::ConnectedClosed => write!(f, "closed"),
            DpState::Dominating { members, excused } => write!(f, "{members}|{excused}"),
        }
    }
}

impl Serialize for DpState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn state_count_bound(constraint: Constraint, bag: usize, root: bool) -> u128 {
    match constraint {
        Constraint::IndependentSet | Constraint::VertexCover => 1u128 << bag.min(100),
        Constraint::Connectivity if root => (1u128 << bag.min(100)) + 1,
        Constraint::Connectivity => (0..=bag).map(|b| binomial(bag, b) * bell(b)).sum::<u128>() + 1,
        Constraint::DominatingSet if root => 1u128 << bag.min(100),
        Constraint::DominatingSet => 1u128 << (2 * bag).min(100),
    }
}

/// `Σ_i` in canonical order. Fails with [`GcmcError::StateCap`] when the
/// space would exceed `cap` states.
pub fn enumerate_states(
    constraint: Constraint,
    td: &TreeDecomposition,
    g: &ConstraintGraph,
    i: NodeId,
    cap: usize,
) -> Result<Vec<DpState>> {
    if i >= td.len() {
        return Err(GcmcError::UnknownNode(i));
    }
    let bag = td.bag(i);
    let root = i == td.root();
    let bound = state_count_bound(constraint, bag.len(), root);
    let over = |count: usize| GcmcError::StateCap { node: i, count, cap };
    if bag.len() > MAX_ENUMERATED_BAG {
        return Err(over(usize::try_from(bound).unwrap_or(usize::MAX)));
    }
    if !matches!(constraint, Constraint::IndependentSet | Constraint::VertexCover) && bound > cap as u128 {
        return Err(over(usize::try_from(bound).unwrap_or(usize::MAX)));
    }
    let mut states = Vec::new();
    match constraint {
        Constraint::IndependentSet | Constraint::VertexCover => {
            for s in bag.subsets() {
                if is_feasible_in_bag(g, constraint, bag, s) {
                    states.push(DpState::Subset(s));
                    if states.len() > cap {
                        return Err(over(states.len()));
                    }
                }
            }
        }
        Constraint::Connectivity => {
            for b in bag.subsets() {
                if root {
                    states.push(DpState::Connected { members: b, parts: Partition::single(b) });
                } else {
                    for parts in set_partitions(b) {
                        states.push(DpState::Connected { members: b, parts });
                    }
                }
            }
            if !td.is_leaf(i) {
                states.push(DpState::ConnectedClosed);
            }
        }
        Constraint::DominatingSet => {
            for b in bag.subsets() {
                if root {
                    states.push(DpState::Dominating { members: b, excused: VertexSet::EMPTY });
                } else {
                    for y in bag.subsets() {
                        states.push(DpState::Dominating { members: b, excused: y });
                    }
                }
            }
        }
    }
    states.sort();
    Ok(states)
}

fn is_feasible_in_bag(g: &ConstraintGraph, constraint: Constraint, bag: VertexSet, s: VertexSet) -> bool {
    match constraint {
        Constraint::IndependentSet => s.iter().all(|v| g.neighbors(v).is_disjoint(s)),
        Constraint::VertexCover => bag
            .iter()
            .filter(|&u| !s.contains(u))
            .all(|u| g.neighbors(u).intersection(bag).is_subset(s)),
        _ => true,
    }
}

/// `X_{i,σ}` for a state already known to belong to `Σ_i`.
pub fn required_set(state: &DpState) -> VertexSet {
    state.required_set()
}

/// Node states for a whole decomposition, one index into `Σ_i` per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateAssignment(Vec<usize>);

impl StateAssignment {
    pub fn new(indices: Vec<usize>) -> Self {
        StateAssignment(indices)
    }

    pub fn get(&self, i: NodeId) -> usize {
        self.0[i]
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn states<'a>(&self, dp: &'a ConstraintDp) -> Vec<&'a DpState> {
        self.0.iter().enumerate().map(|(i, &k)| dp.state(i, k)).collect()
    }
}

/// A constraint DP bound to one graph and decomposition, with its `ℱ`
/// tables, leaf flags and liveness computed up front.
#[derive(Clone, Debug)]
pub struct ConstraintDp {
    constraint: Constraint,
    graph: ConstraintGraph,
    td: TreeDecomposition,
    states: Vec<Vec<DpState>>,
    combos: Vec<Vec<Vec<(usize, usize)>>>,
    leaf_ok: Vec<Vec<bool>>,
    live: Vec<Vec<bool>>,
    usable: Vec<Vec<bool>>,
    owned: Vec<VertexSet>,
}

impl ConstraintDp {
    /// Build with the state cap taken from the environment.
    pub fn new(graph: &ConstraintGraph, td: &TreeDecomposition, constraint: Constraint) -> Result<Self> {
        Self::with_cap(graph, td, constraint, state_cap_from_env())
    }

    pub fn with_cap(
        graph: &ConstraintGraph,
        td: &TreeDecomposition,
        constraint: Constraint,
        cap: usize,
    ) -> Result<Self> {
        if !td.covered_vertices().is_subset(graph.vertices()) {
            return Err(GcmcError::InvalidDecomposition("bags mention vertices outside the graph".into()));
        }
        let count = td.len();
        let mut states = Vec::with_capacity(count);
        for i in td.nodes() {
            states.push(enumerate_states(constraint, td, graph, i, cap)?);
        }
        let mut dp = ConstraintDp {
            constraint,
            graph: graph.clone(),
            td: td.clone(),
            states,
            combos: vec![Vec::new(); count],
            leaf_ok: vec![Vec::new(); count],
            live: vec![Vec::new(); count],
            usable: vec![Vec::new(); count],
            owned: vec![VertexSet::EMPTY; count],
        };
        for u in td.covered_vertices().iter() {
            let top = td.highest_node(u)?;
            dp.owned[top].insert(u);
        }
        for i in td.nodes() {
            if td.is_leaf(i) {
                dp.leaf_ok[i] = (0..dp.states[i].len()).map(|k| dp.leaf_rule(i, k)).collect();
            } else {
                dp.combos[i] = (0..dp.states[i].len()).map(|k| dp.generate_combos(i, k)).collect();
            }
        }
        for &i in td.bfs_order().iter().rev() {
            dp.live[i] = match td.child_pair(i) {
                None => dp.leaf_ok[i].clone(),
                Some((a, b)) => dp.combos[i]
                    .iter()
                    .map(|cs| cs.iter().any(|&(x, y)| dp.live[a][x] && dp.live[b][y]))
                    .collect(),
            };
        }
        for i in td.nodes() {
            dp.usable[i] = vec![false; dp.states[i].len()];
        }
        let root = td.root();
        dp.usable[root] = dp.live[root].clone();
        for &i in td.bfs_order() {
            if let Some((a, b)) = td.child_pair(i) {
                for k in 0..dp.states[i].len() {
                    if !dp.usable[i][k] {
                        continue;
                    }
                    for &(x, y) in &dp.combos[i][k] {
                        if dp.live[a][x] && dp.live[b][y] {
                            dp.usable[a][x] = true;
                            dp.usable[b][y] = true;
                        }
                    }
                }
            }
        }
        Ok(dp)
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn graph(&self) -> &ConstraintGraph {
        &self.graph
    }

    pub fn td(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn states(&self, i: NodeId) -> &[DpState] {
        &self.states[i]
    }

    pub fn num_states(&self, i: NodeId) -> usize {
        self.states[i].len()
    }

    pub fn state(&self, i: NodeId, k: usize) -> &DpState {
        &self.states[i][k]
    }

    pub fn state_index(&self, i: NodeId, state: &DpState) -> Option<usize> {
        self.states.get(i)?.binary_search(state).ok()
    }

    fn check_state(&self, i: NodeId, k: usize) -> Result<()> {
        if i >= self.td.len() {
            Err(GcmcError::UnknownNode(i))
        } else if k >= self.states[i].len() {
            Err(GcmcError::StateNotInSpace(i))
        } else {
            Ok(())
        }
    }

    /// `X_{i,σ}` for state index `k` at node `i`.
    pub fn required_set(&self, i: NodeId, k: usize) -> Result<VertexSet> {
        self.check_state(i, k)?;
        Ok(self.states[i][k].required_set())
    }

    /// `X_{i,σ}` without bounds reporting.
    pub(crate) fn required(&self, i: NodeId, k: usize) -> VertexSet {
        self.states[i][k].required_set()
    }

    /// `ℱ_{i,σ}` as pairs of state indices of `(j1, j2)`, the children of `i`
    /// in decomposition order.
    pub fn child_combos(&self, i: NodeId, k: usize) -> Result<&[(usize, usize)]> {
        self.check_state(i, k)?;
        if self.td.is_leaf(i) {
            return Err(GcmcError::LeafNode(i));
        }
        Ok(&self.combos[i][k])
    }

    pub(crate) fn combos(&self, i: NodeId, k: usize) -> &[(usize, usize)] {
        &self.combos[i][k]
    }

    /// Membership in the memoized `ℱ_{i,σ}` table.
    pub fn is_valid_combo(&self, i: NodeId, k: usize, a: usize, b: usize) -> bool {
        self.combos
            .get(i)
            .and_then(|c| c.get(k))
            .is_some_and(|cs| cs.binary_search(&(a, b)).is_ok())
    }

    pub fn leaf_feasible(&self, i: NodeId, k: usize) -> Result<bool> {
        self.check_state(i, k)?;
        if !self.td.is_leaf(i) {
            return Err(GcmcError::NotLeaf(i));
        }
        Ok(self.leaf_ok[i][k])
    }

    /// `ℋ_{i,σ} ≠ ∅`.
    pub fn is_live(&self, i: NodeId, k: usize) -> bool {
        self.live[i][k]
    }

    /// Live and reachable from a live root state through live combinations.
    /// Any state outside this set has zero mass in every feasible LP point.
    pub fn is_usable(&self, i: NodeId, k: usize) -> bool {
        self.usable[i][k]
    }

    pub fn usable_states(&self, i: NodeId) -> impl Iterator<Item = usize> + '_ {
        (0..self.states[i].len()).filter(move |&k| self.usable[i][k])
    }

    /// Vertices `u` with `ū = i`.
    pub fn owned_vertices(&self, i: NodeId) -> VertexSet {
        self.owned[i]
    }

    fn leaf_rule(&self, i: NodeId, k: usize) -> bool {
        let bag = self.td.bag(i);
        match &self.states[i][k] {
            DpState::Subset(_) => true,
            DpState::Connected { members, parts } => {
                let comps = self.graph.components(*members);
                parts.parts().iter().all(|p| comps.iter().any(|c| p.is_subset(*c)))
            }
            DpState::ConnectedClosed => false,
            DpState::Dominating { members, excused } => {
                bag.difference(*excused).is_subset(closed_neighborhood(&self.graph, *members))
            }
        }
    }

    /// Condition on a single child state that does not depend on the sibling.
    fn child_compatible(&self, i: NodeId, k: usize, j: NodeId, w: &DpState) -> bool {
        let xi = self.td.bag(i);
        let xj = self.td.bag(j);
        match (&self.states[i][k], w) {
            (DpState::Subset(s), DpState::Subset(t)) => t.intersection(xi) == s.intersection(xj),
            (DpState::ConnectedClosed, DpState::ConnectedClosed) => true,
            (DpState::ConnectedClosed, DpState::Connected { members, parts }) => {
                members.is_empty() || (parts.len() == 1 && members.is_disjoint(xi))
            }
            (DpState::Connected { .. }, DpState::ConnectedClosed) => false,
            (DpState::Connected { members: bi, .. }, DpState::Connected { members: bj, parts }) => {
                bi.intersection(xj) == bj.intersection(xi) && parts.parts().iter().all(|p| !p.is_disjoint(*bi))
            }
            (DpState::Dominating { members: bi, .. }, DpState::Dominating { members: bj, .. }) => {
                bi.intersection(xj) == bj.intersection(xi)
            }
            _ => false,
        }
    }

    /// Full `ℱ` rule for a candidate pair whose members already pass
    /// [`Self::child_compatible`].
    fn pair_rule(&self, i: NodeId, k: usize, (j1, j2): (NodeId, NodeId), w1: &DpState, w2: &DpState) -> bool {
        match &self.states[i][k] {
            DpState::Subset(_) => true,
            DpState::ConnectedClosed => {
                let carrier = |w: &DpState| !w.is_empty_connected();
                (carrier(w1) && w2.is_empty_connected()) || (w1.is_empty_connected() && carrier(w2))
            }
            DpState::Connected { members, parts } => {
                let (DpState::Connected { parts: p1, .. }, DpState::Connected { parts: p2, .. }) = (w1, w2) else {
                    return false;
                };
                let bar = self.graph.components(*members);
                satisfied_by_parts(
                    parts.parts(),
                    bar.into_iter().chain(p1.parts().iter().copied()).chain(p2.parts().iter().copied()),
                )
            }
            DpState::Dominating { members, excused } => {
                let (DpState::Dominating { excused: y1, .. }, DpState::Dominating { excused: y2, .. }) = (w1, w2)
                else {
                    return false;
                };
                let need = self.td.below(i).difference(*excused);
                let have = self
                    .td
                    .below(j1)
                    .difference(*y1)
                    .union(self.td.below(j2).difference(*y2))
                    .union(closed_neighborhood(&self.graph, *members));
                need.is_subset(have)
            }
        }
    }

    fn generate_combos(&self, i: NodeId, k: usize) -> Vec<(usize, usize)> {
        let (j1, j2) = self.td.child_pair(i).expect("internal node has two children");
        let cand = |j: NodeId| -> Vec<usize> {
            (0..self.states[j].len())
                .filter(|&x| self.child_compatible(i, k, j, &self.states[j][x]))
                .collect()
        };
        let (c1, c2) = (cand(j1), cand(j2));
        let mut out = Vec::new();
        for &a in &c1 {
            for &b in &c2 {
                if self.pair_rule(i, k, (j1, j2), &self.states[j1][a], &self.states[j2][b]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Maximise `Σ_{u∈S} f(u)` over feasible `S`. Ties go to the first
    /// state in canonical order at each node. The returned value is the sum
    /// over `S` taken in vertex order.
    pub fn solve_linear_objective(&self, f: &[f64]) -> Result<(VertexSet, f64)> {
        let n = self.graph.n();
        if f.len() != n {
            return Err(GcmcError::InvalidWeights(format!("expected {n} vertex weights, got {}", f.len())));
        }
        let gain = |i: NodeId, k: usize| -> f64 {
            self.required(i, k).intersection(self.owned[i]).iter().map(|u| f[u]).sum()
        };
        let count = self.td.len();
        let mut best: Vec<Vec<Option<f64>>> = vec![Vec::new(); count];
        let mut choice: Vec<Vec<usize>> = vec![Vec::new(); count];
        for &i in self.td.bfs_order().iter().rev() {
            let m = self.states[i].len();
            best[i] = vec![None; m];
            choice[i] = vec![usize::MAX; m];
            match self.td.child_pair(i) {
                None => {
                    best[i] = (0..m).map(|k| self.leaf_ok[i][k].then(|| gain(i, k))).collect();
                }
                Some((a, b)) => {
                    for k in 0..m {
                        let mut top: Option<(f64, usize)> = None;
                        for (c, &(x, y)) in self.combos[i][k].iter().enumerate() {
                            if let (Some(vx), Some(vy)) = (best[a][x], best[b][y]) {
                                let v = vx + vy;
                                if top.is_none_or(|(t, _)| v > t) {
                                    top = Some((v, c));
                                }
                            }
                        }
                        if let Some((v, c)) = top {
                            best[i][k] = Some(v + gain(i, k));
                            choice[i][k] = c;
                        }
                    }
                }
            }
        }
        let root = self.td.root();
        let mut top: Option<(f64, usize)> = None;
        for (k, v) in best[root].iter().enumerate() {
            if let Some(v) = *v {
                if top.is_none_or(|(t, _)| v > t) {
                    top = Some((v, k));
                }
            }
        }
        let (_, k_root) = top.ok_or(GcmcError::NoFeasibleSolution)?;
        let mut assign = vec![0usize; count];
        assign[root] = k_root;
        for &i in self.td.bfs_order() {
            if let Some((a, b)) = self.td.child_pair(i) {
                let (x, y) = self.combos[i][assign[i]][choice[i][assign[i]]];
                assign[a] = x;
                assign[b] = y;
            }
        }
        let s = self.reassemble(&StateAssignment(assign))?;
        let value = s.iter().map(|u| f[u]).sum();
        Ok((s, value))
    }

    /// Check that `b` is a consistent assignment (valid combos at internal
    /// nodes, feasible leaves) and return `∪_i X_{i,b(i)}`.
    pub fn reassemble(&self, b: &StateAssignment) -> Result<VertexSet> {
        if b.0.len() != self.td.len() {
            return Err(GcmcError::InvalidDecomposition("assignment length differs from node count".into()));
        }
        let mut s = VertexSet::EMPTY;
        for i in self.td.nodes() {
            let k = b.get(i);
            self.check_state(i, k)?;
            let ok = match self.td.child_pair(i) {
                None => self.leaf_ok[i][k],
                Some((x, y)) => self.is_valid_combo(i, k, b.get(x), b.get(y)),
            };
            if !ok {
                return Err(GcmcError::InfeasibleSet(format!("state assignment breaks the rule at node {i}")));
            }
            s = s.union(self.required(i, k));
        }
        Ok(s)
    }

    /// Witness states `b(i)` for a feasible `S`, built top-down.
    pub fn states_of_solution(&self, s: VertexSet) -> Result<StateAssignment> {
        if !is_feasible(&self.graph, self.constraint, s) {
            return Err(GcmcError::InfeasibleSet(self.constraint.name().into()));
        }
        let root = self.td.root();
        let mut out = Vec::with_capacity(self.td.len());
        for i in self.td.nodes() {
            let xi = self.td.bag(i);
            let below = s.intersection(self.td.below(i));
            let b = s.intersection(xi);
            let state = match self.constraint {
                Constraint::IndependentSet | Constraint::VertexCover => DpState::Subset(b),
                Constraint::Connectivity => {
                    if b.is_empty() {
                        if below.is_empty() {
                            DpState::Connected { members: b, parts: Partition::single(b) }
                        } else {
                            DpState::ConnectedClosed
                        }
                    } else if i == root {
                        DpState::Connected { members: b, parts: Partition::single(b) }
                    } else {
                        let parts = self
                            .graph
                            .components(below)
                            .into_iter()
                            .map(|c| c.intersection(b))
                            .filter(|p| !p.is_empty());
                        DpState::Connected { members: b, parts: Partition::new(parts)? }
                    }
                }
                Constraint::DominatingSet => {
                    let excused = if i == root {
                        VertexSet::EMPTY
                    } else {
                        xi.difference(closed_neighborhood(&self.graph, below))
                    };
                    DpState::Dominating { members: b, excused }
                }
            };
            out.push(self.state_index(i, &state).ok_or(GcmcError::StateNotInSpace(i))?);
        }
        Ok(StateAssignment(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::build_tree_decomposition;

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    fn part(ps: &[&[Vertex]]) -> Partition {
        Partition::new(ps.iter().map(|p| set(p))).unwrap()
    }

    fn p3() -> (ConstraintGraph, TreeDecomposition) {
        let g = ConstraintGraph::path(3).unwrap();
        let td = build_tree_decomposition(&g);
        (g, td)
    }

    /// Leaf-only decomposition holding bag {0,1}, optionally as a non-root.
    fn two_bag(edge: bool) -> (ConstraintGraph, TreeDecomposition) {
        let g = if edge { ConstraintGraph::path(2).unwrap() } else { ConstraintGraph::empty(2).unwrap() };
        let td = TreeDecomposition::from_parts(
            0,
            vec![set(&[0, 1]), set(&[0, 1]), VertexSet::EMPTY],
            vec![vec![1, 2], vec![], vec![]],
        )
        .unwrap();
        (g, td)
    }

    #[test]
    fn bag_state_examples() {
        let g = ConstraintGraph::path(2).unwrap();
        let td = build_tree_decomposition(&g);
        let is = enumerate_states(Constraint::IndependentSet, &td, &g, 0, 100).unwrap();
        assert_eq!(is, vec![DpState::Subset(set(&[])), DpState::Subset(set(&[0])), DpState::Subset(set(&[1]))]);
        let vc = enumerate_states(Constraint::VertexCover, &td, &g, 0, 100).unwrap();
        assert_eq!(vc, vec![DpState::Subset(set(&[0])), DpState::Subset(set(&[1])), DpState::Subset(set(&[0, 1]))]);

        let (g, td) = two_bag(true);
        let conn = enumerate_states(Constraint::Connectivity, &td, &g, 1, 100).unwrap();
        let expect = vec![
            DpState::Connected { members: set(&[]), parts: part(&[]) },
            DpState::Connected { members: set(&[0]), parts: part(&[&[0]]) },
            DpState::Connected { members: set(&[1]), parts: part(&[&[1]]) },
            DpState::Connected { members: set(&[0, 1]), parts: part(&[&[0, 1]]) },
            DpState::Connected { members: set(&[0, 1]), parts: part(&[&[0], &[1]]) },
        ];
        let mut sorted_expect = expect.clone();
        sorted_expect.sort();
        assert_eq!(conn, sorted_expect);
        assert_eq!(conn.len(), 5);
    }

    #[test]
    fn root_specializations() {
        let (g, td) = two_bag(true);
        let conn = enumerate_states(Constraint::Connectivity, &td, &g, 0, 100).unwrap();
        // four single-part states plus the closed state at an internal root
        assert_eq!(conn.len(), 5);
        assert!(conn.iter().all(|s| match s {
            DpState::Connected { parts, .. } => parts.len() <= 1,
            DpState::ConnectedClosed => true,
            _ => false,
        }));
        assert_eq!(conn.last(), Some(&DpState::ConnectedClosed));
        let ds = enumerate_states(Constraint::DominatingSet, &td, &g, 0, 100).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(enumerate_states(Constraint::DominatingSet, &td, &g, 1, 100).unwrap().len(), 16);
    }

    #[test]
    fn state_cap_is_enforced() {
        let g = ConstraintGraph::cycle(3).unwrap();
        let td = build_tree_decomposition(&g);
        let err = enumerate_states(Constraint::DominatingSet, &td, &g, 0, 4).unwrap_err();
        assert!(matches!(err, GcmcError::StateCap { count: 8, cap: 4, .. }));
        assert!(err.is_cap_error());
        assert!(ConstraintDp::with_cap(&g, &td, Constraint::IndependentSet, 3).is_err());
    }

    #[test]
    fn required_set_examples() {
        assert_eq!(DpState::Subset(set(&[0])).required_set(), set(&[0]));
        let c = DpState::Connected { members: set(&[0, 1]), parts: part(&[&[0, 1]]) };
        assert_eq!(required_set(&c), set(&[0, 1]));
        let d = DpState::Dominating { members: set(&[0]), excused: set(&[1]) };
        assert_eq!(d.required_set(), set(&[0]));
        assert_eq!(DpState::ConnectedClosed.required_set(), VertexSet::EMPTY);
    }

    #[test]
    fn partition_satisfied_examples() {
        let ab = part(&[&[0, 1]]);
        assert!(!partition_satisfied(&ab, &[part(&[&[0], &[1]])]));
        assert!(partition_satisfied(&ab, std::slice::from_ref(&ab)));
        assert!(partition_satisfied(&part(&[&[0, 2]]), &[part(&[&[0, 1]]), part(&[&[1, 2]])]));
        assert!(partition_satisfied(&part(&[]), &[]));
        assert!(Partition::new([set(&[0, 1]), set(&[1])]).is_err());
    }

    #[test]
    fn is_combo_example_on_p3() {
        let (g, td) = p3();
        let dp = ConstraintDp::new(&g, &td, Constraint::IndependentSet).unwrap();
        let root = td.root();
        let k = dp.state_index(root, &DpState::Subset(set(&[0]))).unwrap();
        let (j1, j2) = td.child_pair(root).unwrap();
        let real = if td.bag(j1).is_empty() { j2 } else { j1 };
        assert_eq!(td.bag(real), set(&[1, 2]));
        let mut firsts: Vec<VertexSet> = dp
            .child_combos(root, k)
            .unwrap()
            .iter()
            .map(|&(a, b)| if real == j1 { dp.required(j1, a) } else { dp.required(j2, b) })
            .collect();
        firsts.sort_by(|a, b| a.canonical_cmp(b));
        assert_eq!(firsts, vec![set(&[]), set(&[2])]);
        assert!(matches!(dp.child_combos(real, 0), Err(GcmcError::LeafNode(_))));
        assert!(matches!(dp.leaf_feasible(root, 0), Err(GcmcError::NotLeaf(_))));
    }

    #[test]
    fn connectivity_leaf_examples() {
        for (edge, expect) in [(true, true), (false, false)] {
            let (g, td) = two_bag(edge);
            let dp = ConstraintDp::new(&g, &td, Constraint::Connectivity).unwrap();
            let k = dp
                .state_index(1, &DpState::Connected { members: set(&[0, 1]), parts: part(&[&[0, 1]]) })
                .unwrap();
            assert_eq!(dp.leaf_feasible(1, k).unwrap(), expect);
        }
    }

    #[test]
    fn dominating_leaf_example() {
        let (g, td) = two_bag(true);
        let dp = ConstraintDp::new(&g, &td, Constraint::DominatingSet).unwrap();
        let k = dp
            .state_index(1, &DpState::Dominating { members: set(&[0]), excused: VertexSet::EMPTY })
            .unwrap();
        assert!(dp.leaf_feasible(1, k).unwrap());
        let k = dp
            .state_index(1, &DpState::Dominating { members: VertexSet::EMPTY, excused: set(&[0]) })
            .unwrap();
        assert!(!dp.leaf_feasible(1, k).unwrap());
    }

    #[test]
    fn linear_objective_examples() {
        let (g, td) = p3();
        let solve = |c: Constraint, f: &[f64]| ConstraintDp::new(&g, &td, c).unwrap().solve_linear_objective(f).unwrap();
        assert_eq!(solve(Constraint::IndependentSet, &[1.0, 1.0, 1.0]), (set(&[0, 2]), 2.0));
        assert_eq!(solve(Constraint::VertexCover, &[-1.0, -1.0, -1.0]), (set(&[1]), -1.0));
        let (s, v) = solve(Constraint::Connectivity, &[1.0, -5.0, 1.0]);
        assert_eq!(v, 1.0);
        assert!(s == set(&[0]) || s == set(&[2]));
    }

    #[test]
    fn closed_state_reaches_sets_below_the_root_bag() {
        // Path 0-1-2-3-4: the best connected set {3,4} avoids whichever bag
        // the root gets unless the root is at the far end.
        let g = ConstraintGraph::path(5).unwrap();
        let td = build_tree_decomposition_containing_zero(&g);
        let dp = ConstraintDp::new(&g, &td, Constraint::Connectivity).unwrap();
        let (s, v) = dp.solve_linear_objective(&[-1.0, -1.0, -1.0, 2.0, 2.0]).unwrap();
        assert_eq!((s, v), (set(&[3, 4]), 4.0));
    }

    fn build_tree_decomposition_containing_zero(g: &ConstraintGraph) -> TreeDecomposition {
        crate::decomp::build_tree_decomposition_containing(g, 0).unwrap()
    }

    #[test]
    fn states_of_solution_examples() {
        let (g, td) = p3();
        let is = ConstraintDp::new(&g, &td, Constraint::IndependentSet).unwrap();
        let b = is.states_of_solution(VertexSet::EMPTY).unwrap();
        assert!(b.states(&is).iter().all(|s| s.required_set().is_empty()));
        let b = is.states_of_solution(set(&[0, 2])).unwrap();
        let leaf = td.highest_node(2).unwrap();
        assert_eq!(is.state(td.root(), b.get(td.root())), &DpState::Subset(set(&[0])));
        assert_eq!(is.state(leaf, b.get(leaf)), &DpState::Subset(set(&[2])));
        assert!(is.states_of_solution(set(&[0, 1])).is_err());

        let conn = ConstraintDp::new(&g, &td, Constraint::Connectivity).unwrap();
        let b = conn.states_of_solution(set(&[0, 1, 2])).unwrap();
        assert_eq!(
            conn.state(td.root(), b.get(td.root())),
            &DpState::Connected { members: set(&[0, 1]), parts: part(&[&[0, 1]]) }
        );
        assert_eq!(
            conn.state(leaf, b.get(leaf)),
            &DpState::Connected { members: set(&[1, 2]), parts: part(&[&[1, 2]]) }
        );
        assert_eq!(conn.reassemble(&b).unwrap(), set(&[0, 1, 2]));
    }

    #[test]
    fn dominating_combo_example() {
        let (g, td) = p3();
        let dp = ConstraintDp::new(&g, &td, Constraint::DominatingSet).unwrap();
        let root = td.root();
        let k = dp
            .state_index(root, &DpState::Dominating { members: set(&[1]), excused: VertexSet::EMPTY })
            .unwrap();
        let leaf = td.highest_node(2).unwrap();
        let (j1, _) = td.child_pair(root).unwrap();
        for &(a, b) in dp.child_combos(root, k).unwrap() {
            let w = if leaf == j1 { dp.state(leaf, a) } else { dp.state(leaf, b) };
            let DpState::Dominating { members, .. } = w else { panic!() };
            assert!(members.contains(1));
            // every combination that survives yields a dominating set
            let sel = members.union(set(&[1]));
            assert!(is_feasible(&g, Constraint::DominatingSet, sel) || !dp.is_live(leaf, if leaf == j1 { a } else { b }));
        }
    }
}
