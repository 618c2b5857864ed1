//! Constraint graphs, complete-graph weights, cut evaluation and direct
//! feasibility checks.
//!
//! Everything here works without a tree decomposition and is used as ground
//! truth by the DP, LP and rounding layers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GcmcError, Result};

pub type Vertex = usize;

/// Largest supported vertex count; vertex sets are 64-bit masks.
pub const MAX_VERTICES: usize = 64;

/// A set of vertices stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSet(u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn from_bits(bits: u64) -> Self {
        VertexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: Vertex) -> Self {
        debug_assert!(v < MAX_VERTICES);
        VertexSet(1u64 << v)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, v: Vertex) -> bool {
        v < MAX_VERTICES && self.0 & (1u64 << v) != 0
    }

    pub fn insert(&mut self, v: Vertex) {
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: Vertex) {
        self.0 &= !(1u64 << v);
    }

    pub fn with(self, v: Vertex) -> Self {
        VertexSet(self.0 | (1u64 << v))
    }

    pub fn union(self, other: Self) -> Self {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VertexSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VertexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<Vertex> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> impl Iterator<Item = Vertex> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    pub fn to_vec(self) -> Vec<Vertex> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = VertexSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(VertexSet(cur))
        })
    }

    /// Canonical order used for determinism and tie-breaking: by size, then
    /// lexicographically on the sorted member list.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let verts = Vec::<Vertex>::deserialize(d)?;
        if let Some(&v) = verts.iter().find(|&&v| v >= MAX_VERTICES) {
            return Err(serde::de::Error::custom(format!("vertex {v} out of range")));
        }
        Ok(verts.into_iter().collect())
    }
}

/// The undirected constraint graph `G = (V, E)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<VertexSet>,
}

impl ConstraintGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(GcmcError::TooManyVertices { n, max: MAX_VERTICES });
        }
        let mut adj = vec![VertexSet::EMPTY; n];
        let mut list = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GcmcError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GcmcError::InvalidGraph(format!("self-loop at {u}")));
            }
            if adj[u].contains(v) {
                return Err(GcmcError::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            adj[u].insert(v);
            adj[v].insert(u);
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        Ok(ConstraintGraph { n, edges: list, adj })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> VertexSet {
        self.adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.adj[u].contains(v)
    }

    fn check_set(&self, s: VertexSet) -> Result<()> {
        match s.difference(self.vertices()).first() {
            Some(v) => Err(GcmcError::VertexOutOfRange { vertex: v, n: self.n }),
            None => Ok(()),
        }
    }

    /// Connected components of the induced subgraph `G[s]`, ordered by their
    /// smallest vertex.
    pub fn components(&self, s: VertexSet) -> Vec<VertexSet> {
        let mut rest = s;
        let mut out = Vec::new();
        while let Some(start) = rest.first() {
            let mut comp = VertexSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VertexSet::EMPTY;
                for v in frontier.iter() {
                    next = next.union(self.adj[v]);
                }
                next = next.intersection(s).difference(comp);
                comp = comp.union(next);
                frontier = next;
            }
            rest = rest.difference(comp);
            out.push(comp);
        }
        out
    }

    /// The graph induced on `keep`, with vertices renumbered in increasing
    /// order. Returns the new graph and the old vertex of every new vertex.
    pub fn induced(&self, keep: VertexSet) -> (ConstraintGraph, Vec<Vertex>) {
        let old: Vec<Vertex> = keep.iter().collect();
        let mut new_of = vec![usize::MAX; self.n];
        for (k, &v) in old.iter().enumerate() {
            new_of[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep.contains(u) && keep.contains(v))
            .map(|&(u, v)| (new_of[u], new_of[v]));
        let g = ConstraintGraph::new(old.len(), edges).expect("induced subgraph is simple");
        (g, old)
    }
}

/// Symmetric non-negative weights on vertex pairs; absent pairs weigh 0.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct WeightFunction {
    n: usize,
    entries: BTreeMap<(Vertex, Vertex), f64>,
}

impl WeightFunction {
    pub fn new(n: usize, triples: impl IntoIterator<Item = (Vertex, Vertex, f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (u, v, w) in triples {
            for x in [u, v] {
                if x >= n {
                    return Err(GcmcError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(GcmcError::InvalidWeights(format!("weight on pair ({u}, {u})")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(GcmcError::InvalidWeights(format!(
                    "weight {w} on ({u}, {v}) is not a non-negative number"
                )));
            }
            if entries.insert((u.min(v), u.max(v)), w).is_some() {
                return Err(GcmcError::InvalidWeights(format!("duplicate pair ({u}, {v})")));
            }
        }
        Ok(WeightFunction { n, entries })
    }

    pub fn zero(n: usize) -> Self {
        WeightFunction { n, entries: BTreeMap::new() }
    }

    /// Unit weight on every pair.
    pub fn uniform(n: usize, w: f64) -> Self {
        let mut entries = BTreeMap::new();
        for u in 0..n {
            for v in u + 1..n {
                entries.insert((u, v), w);
            }
        }
        WeightFunction { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> f64 {
        self.entries.get(&(u.min(v), u.max(v))).copied().unwrap_or(0.0)
    }

    /// Stored entries `((u, v), w)` with `u < v`, in sorted order.
    pub fn entries(&self) -> impl Iterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.entries.iter().map(|(&k, &w)| (k, w))
    }

    /// Pairs with strictly positive weight, sorted.
    pub fn positive_pairs(&self) -> impl Iterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.entries().filter(|&(_, w)| w > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// The graph constraint defining the feasible family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    IndependentSet,
    VertexCover,
    DominatingSet,
    Connectivity,
}

impl Constraint {
    pub const ALL: [Constraint; 4] = [
        Constraint::IndependentSet,
        Constraint::VertexCover,
        Constraint::DominatingSet,
        Constraint::Connectivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::IndependentSet => "independent-set",
            Constraint::VertexCover => "vertex-cover",
            Constraint::DominatingSet => "dominating-set",
            Constraint::Connectivity => "connectivity",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraint {
    type Err = GcmcError;

    fn from_str(s: &str) -> Result<Self> {
        Constraint::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| GcmcError::UnknownConstraint(s.to_string()))
    }
}

/// A complete GCMC input.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: ConstraintGraph,
    pub weights: WeightFunction,
    pub constraint: Constraint,
}

impl Instance {
    pub fn new(graph: ConstraintGraph, weights: WeightFunction, constraint: Constraint) -> Result<Self> {
        if weights.n() > graph.n() {
            return Err(GcmcError::InvalidWeights(format!(
                "weights reference {} vertices but the graph has {}",
                weights.n(),
                graph.n()
            )));
        }
        Ok(Instance { graph, weights, constraint })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn with_constraint(&self, constraint: Constraint) -> Instance {
        Instance { constraint, ..self.clone() }
    }

    pub fn cut(&self, s: VertexSet) -> f64 {
        cut_value_unchecked(&self.weights, s)
    }

    pub fn is_feasible(&self, s: VertexSet) -> bool {
        is_feasible(&self.graph, self.constraint, s)
    }
}

/// `c(δS)`: total weight of pairs with exactly one endpoint in `s`.
pub fn cut_value(weights: &WeightFunction, s: VertexSet, n: usize) -> Result<f64> {
    if let Some(v) = s.difference(VertexSet::full(n)).first() {
        return Err(GcmcError::VertexOutOfRange { vertex: v, n });
    }
    Ok(cut_value_unchecked(weights, s))
}

pub(crate) fn cut_value_unchecked(weights: &WeightFunction, s: VertexSet) -> f64 {
    weights
        .entries()
        .filter(|&((u, v), _)| s.contains(u) != s.contains(v))
        .map(|(_, w)| w)
        .sum()
}

/// `N(S)`: `S` together with all neighbours of `S`.
pub fn closed_neighborhood(g: &ConstraintGraph, s: VertexSet) -> VertexSet {
    s.iter().fold(s, |acc, v| acc.union(g.neighbors(v)))
}

/// Direct textbook check of the constraint on `G`, with no decomposition.
pub fn is_feasible(g: &ConstraintGraph, constraint: Constraint, s: VertexSet) -> bool {
    if g.check_set(s).is_err() {
        return false;
    }
    match constraint {
        Constraint::IndependentSet => s.iter().all(|v| g.neighbors(v).is_disjoint(s)),
        Constraint::VertexCover => g.edges().iter().all(|&(u, v)| s.contains(u) || s.contains(v)),
        Constraint::DominatingSet => closed_neighborhood(g, s) == g.vertices(),
        Constraint::Connectivity => g.components(s).len() <= 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_weights() -> WeightFunction {
        WeightFunction::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap()
    }

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn cut_examples() {
        let c = triangle_weights();
        assert_eq!(cut_value(&c, set(&[]), 3).unwrap(), 0.0);
        assert_eq!(cut_value(&c, set(&[0, 1, 2]), 3).unwrap(), 0.0);
        assert_eq!(cut_value(&c, set(&[0]), 3).unwrap(), 4.0);
        assert!(matches!(
            cut_value(&c, set(&[3]), 3),
            Err(GcmcError::VertexOutOfRange { vertex: 3, .. })
        ));
    }

    #[test]
    fn feasibility_examples() {
        let p3 = ConstraintGraph::path(3).unwrap();
        assert!(is_feasible(&p3, Constraint::IndependentSet, set(&[0, 2])));
        assert!(!is_feasible(&p3, Constraint::VertexCover, set(&[0])));
        assert!(!is_feasible(&p3, Constraint::Connectivity, set(&[0, 2])));
        assert!(is_feasible(&p3, Constraint::Connectivity, set(&[])));
        assert!(is_feasible(&p3, Constraint::Connectivity, set(&[2])));
        assert!(is_feasible(&p3, Constraint::DominatingSet, set(&[1])));
        assert!(!is_feasible(&p3, Constraint::DominatingSet, set(&[0])));
    }

    #[test]
    fn neighborhood_examples() {
        let p3 = ConstraintGraph::path(3).unwrap();
        assert_eq!(closed_neighborhood(&p3, set(&[1])), set(&[0, 1, 2]));
        assert_eq!(closed_neighborhood(&p3, set(&[])), set(&[]));
        assert_eq!(closed_neighborhood(&p3, set(&[0])), set(&[0, 1]));
    }

    #[test]
    fn graph_validation() {
        assert!(ConstraintGraph::new(3, [(0, 0)]).is_err());
        assert!(ConstraintGraph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(ConstraintGraph::new(3, [(0, 3)]).is_err());
        assert!(ConstraintGraph::new(65, []).is_err());
        assert!(WeightFunction::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightFunction::new(3, [(0, 1, -1.0)]).is_err());
        assert!(WeightFunction::new(3, [(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn constraint_names_round_trip() {
        for c in Constraint::ALL {
            assert_eq!(c.name().parse::<Constraint>().unwrap(), c);
        }
        assert!("clique".parse::<Constraint>().is_err());
    }

    #[test]
    fn subsets_enumerates_all() {
        let s = set(&[1, 3, 4]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(VertexSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn canonical_order_is_size_then_lex() {
        let mut v = vec![set(&[0, 1]), set(&[1]), set(&[]), set(&[0])];
        v.sort_by(VertexSet::canonical_cmp);
        assert_eq!(v, vec![set(&[]), set(&[0]), set(&[1]), set(&[0, 1])]);
    }

    #[test]
    fn components_of_induced_subgraph() {
        let p4 = ConstraintGraph::path(4).unwrap();
        assert_eq!(p4.components(set(&[0, 1, 3])), vec![set(&[0, 1]), set(&[3])]);
        assert!(p4.components(VertexSet::EMPTY).is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn weights_strategy(n: usize) -> impl Strategy<Value = WeightFunction> {
            proptest::collection::vec(0.0f64..5.0, n * (n - 1) / 2).prop_map(move |ws| {
                let mut k = 0;
                let mut triples = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        triples.push((u, v, ws[k]));
                        k += 1;
                    }
                }
                WeightFunction::new(n, triples).unwrap()
            })
        }

        proptest! {
            #[test]
            fn cut_is_symmetric(c in weights_strategy(6), bits in 0u64..64) {
                let s = VertexSet::from_bits(bits);
                let comp = VertexSet::full(6).difference(s);
                let a = cut_value(&c, s, 6).unwrap();
                let b = cut_value(&c, comp, 6).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }

            #[test]
            fn cut_monotone_in_weights(c in weights_strategy(5), bits in 0u64..32, u in 0usize..5, v in 0usize..5, extra in 0.0f64..3.0) {
                prop_assume!(u != v);
                let s = VertexSet::from_bits(bits);
                let bumped = WeightFunction::new(5, c.entries().map(|((a, b), w)| {
                    if (a, b) == (u.min(v), u.max(v)) { (a, b, w + extra) } else { (a, b, w) }
                })).unwrap();
                let before = cut_value(&c, s, 5).unwrap();
                let after = cut_value(&bumped, s, 5).unwrap();
                if s.contains(u) != s.contains(v) {
                    prop_assert!(after >= before - 1e-12);
                } else {
                    prop_assert!((after - before).abs() < 1e-12);
                }
            }

            #[test]
            fn closure_properties(edges in proptest::collection::btree_set((0usize..6, 0usize..6), 0..10), bits in 0u64..64, sub in 0u64..64) {
                let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a < b).collect();
                let g = ConstraintGraph::new(6, edges).unwrap();
                let s = VertexSet::from_bits(bits);
                let small = VertexSet::from_bits(bits & sub);
                let big = VertexSet::from_bits(bits | sub);
                if is_feasible(&g, Constraint::IndependentSet, s) {
                    prop_assert!(is_feasible(&g, Constraint::IndependentSet, small));
                }
                for c in [Constraint::VertexCover, Constraint::DominatingSet] {
                    if is_feasible(&g, c, s) {
                        prop_assert!(is_feasible(&g, c, big));
                    }
                }
            }
        }
    }
}
