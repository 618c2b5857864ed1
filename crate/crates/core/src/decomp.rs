//! Rooted binary tree decompositions: construction, validation, queries and
//! the node-set families that index the lifted LP variables.

use std::cmp::Reverse;
use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{GcmcError, Result};
use crate::graph::{ConstraintGraph, Vertex, VertexSet};

pub type NodeId = usize;

/// Largest `|T_l1 ∪ T_l2|` accepted in full family mode (the family holds
/// every subset of such a union).
pub const FULL_MODE_MAX_NODES: usize = 16;

/// A rooted tree decomposition. Node ids are assigned in breadth-first order
/// from the root, so the root is node 0 and ids never decrease with depth.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeDecomposition {
    root: NodeId,
    bags: Vec<VertexSet>,
    children: Vec<Vec<NodeId>>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    subtree: Vec<VertexSet>,
    bfs: Vec<NodeId>,
}

impl TreeDecomposition {
    /// Assemble a decomposition from explicit bags and child lists. Only the
    /// tree shape is checked here; use [`validate_tree_decomposition`] for the
    /// decomposition properties.
    pub fn from_parts(root: NodeId, bags: Vec<VertexSet>, children: Vec<Vec<NodeId>>) -> Result<Self> {
        let count = bags.len();
        if children.len() != count || root >= count {
            return Err(GcmcError::InvalidDecomposition("node lists disagree".into()));
        }
        let mut parent = vec![None; count];
        for (i, ch) in children.iter().enumerate() {
            for &c in ch {
                if c >= count || c == root || parent[c].is_some() {
                    return Err(GcmcError::InvalidDecomposition(format!("bad child {c} of {i}")));
                }
                parent[c] = Some(i);
            }
        }
        let mut depth = vec![usize::MAX; count];
        let mut bfs = Vec::with_capacity(count);
        let mut queue = VecDeque::from([root]);
        depth[root] = 0;
        while let Some(i) = queue.pop_front() {
            bfs.push(i);
            for &c in &children[i] {
                if depth[c] != usize::MAX {
                    return Err(GcmcError::InvalidDecomposition("cycle in tree".into()));
                }
                depth[c] = depth[i] + 1;
                queue.push_back(c);
            }
        }
        if bfs.len() != count {
            return Err(GcmcError::InvalidDecomposition("tree is not connected".into()));
        }
        let mut subtree = bags.clone();
        for &i in bfs.iter().rev() {
            if let Some(p) = parent[i] {
                subtree[p] = subtree[p].union(subtree[i]);
            }
        }
        Ok(TreeDecomposition { root, bags, children, parent, depth, subtree, bfs })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.bags.len()
    }

    /// Nodes in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[NodeId] {
        &self.bfs
    }

    pub fn bag(&self, i: NodeId) -> VertexSet {
        self.bags[i]
    }

    pub fn children(&self, i: NodeId) -> &[NodeId] {
        &self.children[i]
    }

    pub fn parent(&self, i: NodeId) -> Option<NodeId> {
        self.parent[i]
    }

    pub fn depth(&self, i: NodeId) -> usize {
        self.depth[i]
    }

    pub fn is_leaf(&self, i: NodeId) -> bool {
        self.children[i].is_empty()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes().filter(|&i| self.is_leaf(i)).collect()
    }

    /// The two children of a non-leaf node of a binary decomposition.
    pub fn child_pair(&self, i: NodeId) -> Option<(NodeId, NodeId)> {
        match self.children[i].as_slice() {
            &[a, b] => Some((a, b)),
            _ => None,
        }
    }

    /// Other child of `j`'s parent.
    pub fn sibling(&self, j: NodeId) -> Option<NodeId> {
        let p = self.parent[j]?;
        self.children[p].iter().copied().find(|&c| c != j)
    }

    /// Maximum bag size minus one (0 for an all-empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Length of the longest root-leaf path.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    fn check_node(&self, i: NodeId) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(GcmcError::UnknownNode(i))
        }
    }

    /// `V_i`, the union of bags at or below `i`.
    pub fn subtree_vertices(&self, i: NodeId) -> Result<VertexSet> {
        self.check_node(i)?;
        Ok(self.subtree[i])
    }

    /// Unchecked `V_i` for internal callers.
    pub(crate) fn below(&self, i: NodeId) -> VertexSet {
        self.subtree[i]
    }

    /// `T_i`: the nodes of the root-to-`i` path plus both children of every
    /// path node other than `i`.
    pub fn path_family(&self, i: NodeId) -> Result<NodeSet> {
        self.check_node(i)?;
        let mut nodes = vec![i];
        let mut cur = i;
        while let Some(p) = self.parent[cur] {
            nodes.push(p);
            nodes.extend_from_slice(&self.children[p]);
            cur = p;
        }
        Ok(NodeSet::new(nodes))
    }

    /// `ū`: the shallowest node whose bag contains `u`.
    pub fn highest_node(&self, u: Vertex) -> Result<NodeId> {
        self.bfs
            .iter()
            .copied()
            .find(|&i| self.bags[i].contains(u))
            .ok_or(GcmcError::VertexNotInDecomposition(u))
    }

    pub fn is_ancestor(&self, anc: NodeId, mut x: NodeId) -> bool {
        loop {
            if x == anc {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    /// Least common ancestor.
    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Union of all bags.
    pub fn covered_vertices(&self) -> VertexSet {
        self.subtree[self.root]
    }

    pub fn to_dump(&self) -> DecompositionDump {
        DecompositionDump {
            root: self.root,
            nodes: self
                .nodes()
                .map(|i| DumpNode { id: i, bag: self.bags[i].to_vec(), children: self.children[i].clone() })
                .collect(),
        }
    }

    pub fn from_dump(dump: &DecompositionDump) -> Result<Self> {
        let count = dump.nodes.len();
        let mut bags = vec![VertexSet::EMPTY; count];
        let mut children = vec![Vec::new(); count];
        let mut seen = vec![false; count];
        for node in &dump.nodes {
            if node.id >= count || seen[node.id] {
                return Err(GcmcError::InvalidDecomposition(format!("bad node id {}", node.id)));
            }
            seen[node.id] = true;
            bags[node.id] = node.bag.iter().copied().collect();
            children[node.id] = node.children.clone();
        }
        Self::from_parts(dump.root, bags, children)
    }
}

/// Debug dump format: `{ "root": id, "nodes": [{"id", "bag", "children"}] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDump {
    pub root: NodeId,
    pub nodes: Vec<DumpNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpNode {
    pub id: NodeId,
    pub bag: Vec<Vertex>,
    pub children: Vec<NodeId>,
}

/// True iff `td` is rooted, binary (0 or 2 children per node), covers every
/// vertex and edge of `g`, and every vertex occupies a connected subtree.
pub fn validate_tree_decomposition(g: &ConstraintGraph, td: &TreeDecomposition) -> bool {
    if td.nodes().any(|i| !matches!(td.children(i).len(), 0 | 2)) {
        return false;
    }
    if td.covered_vertices() != g.vertices() {
        return false;
    }
    for &(u, v) in g.edges() {
        if !td.nodes().any(|i| td.bag(i).contains(u) && td.bag(i).contains(v)) {
            return false;
        }
    }
    // A vertex's occurrence set is connected iff exactly one occurrence has
    // a parent that does not contain the vertex.
    for v in 0..g.n() {
        let tops = td
            .nodes()
            .filter(|&i| td.bag(i).contains(v))
            .filter(|&i| td.parent(i).is_none_or(|p| !td.bag(p).contains(v)))
            .count();
        if tops != 1 {
            return false;
        }
    }
    true
}

/// Build a binary rooted decomposition with the min-fill heuristic.
pub fn build_tree_decomposition(g: &ConstraintGraph) -> TreeDecomposition {
    build_rooted(g, None).expect("unconstrained root choice always succeeds")
}

/// As [`build_tree_decomposition`], but the root bag is chosen to contain `v`.
pub fn build_tree_decomposition_containing(g: &ConstraintGraph, v: Vertex) -> Result<TreeDecomposition> {
    if v >= g.n() {
        return Err(GcmcError::VertexOutOfRange { vertex: v, n: g.n() });
    }
    build_rooted(g, Some(v))
}

/// Min-fill elimination order; returns the bag created for each eliminated
/// vertex, in elimination order.
fn min_fill_bags(g: &ConstraintGraph) -> Vec<(Vertex, VertexSet)> {
    let n = g.n();
    let mut adj: Vec<VertexSet> = (0..n).map(|v| g.neighbors(v)).collect();
    let mut alive = g.vertices();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let v = alive
            .iter()
            .min_by_key(|&v| {
                let nb = adj[v].intersection(alive);
                let fill: usize = nb.iter().map(|x| nb.difference(adj[x]).len() - 1).sum::<usize>() / 2;
                (fill, nb.len(), v)
            })
            .unwrap();
        let nb = adj[v].intersection(alive);
        for x in nb.iter() {
            adj[x] = adj[x].union(nb.difference(VertexSet::singleton(x)));
        }
        alive.remove(v);
        out.push((v, nb.with(v)));
    }
    out
}

struct RawTree {
    bags: Vec<VertexSet>,
    adj: Vec<BTreeSet<usize>>,
    alive: Vec<bool>,
}

impl RawTree {
    fn clique_tree(g: &ConstraintGraph) -> RawTree {
        let elim = min_fill_bags(g);
        let n = elim.len();
        let mut pos = vec![0; g.n()];
        for (k, &(v, _)) in elim.iter().enumerate() {
            pos[v] = k;
        }
        let bags: Vec<VertexSet> = elim.iter().map(|&(_, b)| b).collect();
        let mut adj = vec![BTreeSet::new(); n];
        for (k, &(v, bag)) in elim.iter().enumerate() {
            if let Some(p) = bag.difference(VertexSet::singleton(v)).iter().map(|x| pos[x]).min() {
                adj[k].insert(p);
                adj[p].insert(k);
            }
        }
        let mut tree = RawTree { bags, adj, alive: vec![true; n] };
        tree.absorb_subsumed();
        tree
    }

    /// Contract every node whose bag is contained in a neighbour's bag.
    fn absorb_subsumed(&mut self) {
        loop {
            let mut merged = false;
            for x in 0..self.bags.len() {
                if !self.alive[x] {
                    continue;
                }
                let target = self.adj[x].iter().copied().find(|&y| self.bags[x].is_subset(self.bags[y]));
                if let Some(y) = target {
                    let nbrs: Vec<usize> = self.adj[x].iter().copied().filter(|&z| z != y).collect();
                    for z in nbrs {
                        self.adj[z].remove(&x);
                        self.adj[z].insert(y);
                        self.adj[y].insert(z);
                    }
                    self.adj[y].remove(&x);
                    self.adj[x].clear();
                    self.alive[x] = false;
                    merged = true;
                }
            }
            if !merged {
                break;
            }
        }
    }

    fn component_of(&self, start: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn eccentricity(&self, start: usize) -> usize {
        let mut dist = std::collections::BTreeMap::from([(start, 0usize)]);
        let mut queue = VecDeque::from([start]);
        let mut far = 0;
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            far = far.max(d);
            for &y in &self.adj[x] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(y) {
                    e.insert(d + 1);
                    queue.push_back(y);
                }
            }
        }
        far
    }

    /// Root preference: largest bag, then most central, then lowest index.
    fn best_root(&self, candidates: impl Iterator<Item = usize>) -> Option<usize> {
        candidates.min_by_key(|&x| (Reverse(self.bags[x].len()), self.eccentricity(x), x))
    }
}

fn build_rooted(g: &ConstraintGraph, must_contain: Option<Vertex>) -> Result<TreeDecomposition> {
    if g.n() == 0 {
        return TreeDecomposition::from_parts(0, vec![VertexSet::EMPTY], vec![Vec::new()]);
    }
    let raw = RawTree::clique_tree(g);
    let alive: Vec<usize> = (0..raw.bags.len()).filter(|&x| raw.alive[x]).collect();
    let root = raw
        .best_root(
            alive
                .iter()
                .copied()
                .filter(|&x| must_contain.is_none_or(|v| raw.bags[x].contains(v))),
        )
        .ok_or_else(|| GcmcError::InvalidDecomposition("no bag holds the requested root vertex".into()))?;

    // Other components hang off the main root, each rooted at its own best node.
    let mut comp_roots = vec![root];
    let mut placed: BTreeSet<usize> = raw.component_of(root).into_iter().collect();
    for &x in &alive {
        if !placed.contains(&x) {
            let comp = raw.component_of(x);
            comp_roots.push(raw.best_root(comp.iter().copied()).unwrap());
            placed.extend(comp);
        }
    }

    let mut bags: Vec<VertexSet> = Vec::new();
    let mut children: Vec<Vec<usize>> = Vec::new();
    let mut id_of = std::collections::BTreeMap::new();
    for &cr in &comp_roots {
        let mut queue = VecDeque::from([(cr, usize::MAX)]);
        while let Some((x, from)) = queue.pop_front() {
            let id = bags.len();
            id_of.insert(x, id);
            bags.push(raw.bags[x]);
            children.push(Vec::new());
            if from != usize::MAX {
                children[id_of[&from]].push(id);
            }
            for &y in &raw.adj[x] {
                if y != from {
                    queue.push_back((y, x));
                }
            }
        }
    }
    for &cr in &comp_roots[1..] {
        let id = id_of[&cr];
        children[0].push(id);
    }

    binarize(&mut bags, &mut children, 0);
    renumber_bfs(bags, children)
}

/// Pad single children with an empty-bag leaf and split wide nodes through
/// copies of their bag.
fn binarize(bags: &mut Vec<VertexSet>, children: &mut Vec<Vec<usize>>, node: usize) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        let ch = children[x].clone();
        match ch.len() {
            0 | 2 => {}
            1 => {
                bags.push(VertexSet::EMPTY);
                children.push(Vec::new());
                children[x].push(bags.len() - 1);
            }
            k => {
                let (left, right) = ch.split_at(k / 2);
                let mut halves = Vec::new();
                for half in [left, right] {
                    if half.len() == 1 {
                        halves.push(half[0]);
                    } else {
                        bags.push(bags[x]);
                        children.push(half.to_vec());
                        halves.push(bags.len() - 1);
                    }
                }
                children[x] = halves;
            }
        }
        stack.extend(children[x].iter().copied());
    }
}

fn renumber_bfs(bags: Vec<VertexSet>, children: Vec<Vec<usize>>) -> Result<TreeDecomposition> {
    let mut order = Vec::with_capacity(bags.len());
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        order.push(x);
        queue.extend(children[x].iter().copied());
    }
    let mut new_id = vec![0; bags.len()];
    for (k, &x) in order.iter().enumerate() {
        new_id[x] = k;
    }
    let new_bags = order.iter().map(|&x| bags[x]).collect();
    let new_children = order
        .iter()
        .map(|&x| children[x].iter().map(|&c| new_id[c]).collect())
        .collect();
    TreeDecomposition::from_parts(0, new_bags, new_children)
}

/// A set of decomposition nodes, kept sorted; the sorted list is the
/// canonical encoding.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut v: Vec<NodeId> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn position(&self, i: NodeId) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn with(&self, i: NodeId) -> NodeSet {
        let mut v = self.0.clone();
        if let Err(p) = v.binary_search(&i) {
            v.insert(p, i);
        }
        NodeSet(v)
    }

    pub fn without(&self, i: NodeId) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&k| k != i).collect())
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.iter().filter(|&k| other.contains(k)).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|k| other.contains(k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    /// Every subset of `T_l1 ∪ T_l2` over all leaf pairs.
    Full,
    /// Only the sets the LP rows and the rounding analysis touch, plus the
    /// one-node-at-a-time chains linking them.
    Reduced,
}

impl std::str::FromStr for FamilyMode {
    type Err = GcmcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FamilyMode::Full),
            "reduced" => Ok(FamilyMode::Reduced),
            other => Err(GcmcError::Parse(format!("unknown family mode `{other}`"))),
        }
    }
}

/// The node-set family indexing the `y` variables. Always contains `∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFamily {
    mode: FamilyMode,
    sets: BTreeSet<NodeSet>,
}

impl NodeFamily {
    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn contains(&self, s: &NodeSet) -> bool {
        self.sets.contains(s)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Members in canonical order (so `∅` comes first).
    pub fn iter(&self) -> impl Iterator<Item = &NodeSet> {
        self.sets.iter()
    }

    pub fn is_subfamily_of(&self, other: &NodeFamily) -> bool {
        self.sets.is_subset(&other.sets)
    }
}

/// Node pairs `(ū, v̄)` for the given vertex pairs.
pub fn anchor_pairs(
    td: &TreeDecomposition,
    pairs: impl IntoIterator<Item = (Vertex, Vertex)>,
) -> Result<Vec<(NodeId, NodeId)>> {
    let mut out = BTreeSet::new();
    for (u, v) in pairs {
        let (a, b) = (td.highest_node(u)?, td.highest_node(v)?);
        out.insert((a.min(b), a.max(b)));
    }
    Ok(out.into_iter().collect())
}

/// Variable family covering every pair of vertices that appear in the
/// decomposition.
pub fn variable_family(td: &TreeDecomposition, mode: FamilyMode) -> Result<NodeFamily> {
    let verts = td.covered_vertices().to_vec();
    let mut pairs = Vec::new();
    for (k, &u) in verts.iter().enumerate() {
        for &v in &verts[k + 1..] {
            pairs.push((u, v));
        }
    }
    let anchors = anchor_pairs(td, pairs)?;
    variable_family_for_anchors(td, mode, &anchors)
}

/// Variable family for an explicit list of anchor node pairs `(ū, v̄)`. In
/// full mode the anchors are irrelevant: every pair is already covered.
pub fn variable_family_for_anchors(
    td: &TreeDecomposition,
    mode: FamilyMode,
    anchors: &[(NodeId, NodeId)],
) -> Result<NodeFamily> {
    let mut sets = BTreeSet::from([NodeSet::empty()]);
    let t: Vec<NodeSet> = td.nodes().map(|i| td.path_family(i).unwrap()).collect();
    match mode {
        FamilyMode::Full => {
            let leaves = td.leaves();
            let mut unions = BTreeSet::new();
            for (k, &l1) in leaves.iter().enumerate() {
                for &l2 in &leaves[k..] {
                    let u = t[l1].union(&t[l2]);
                    if u.len() > FULL_MODE_MAX_NODES {
                        return Err(GcmcError::FamilyTooLarge(format!(
                            "leaf pair union has {} nodes (limit {FULL_MODE_MAX_NODES})",
                            u.len()
                        )));
                    }
                    unions.insert(u);
                }
            }
            for u in unions {
                let nodes = u.as_slice();
                for mask in 0u32..(1 << nodes.len()) {
                    sets.insert(NodeSet::new((0..nodes.len()).filter(|b| mask >> b & 1 == 1).map(|b| nodes[b])));
                }
            }
        }
        FamilyMode::Reduced => {
            for i in td.nodes() {
                sets.insert(t[i].clone());
                if let Some((j, _)) = td.child_pair(i) {
                    sets.insert(t[i].with(j));
                }
            }
            for &(a, b) in anchors {
                for x in [a, b] {
                    if x >= td.len() {
                        return Err(GcmcError::UnknownNode(x));
                    }
                }
                let ab = NodeSet::new([a, b]);
                if a == b {
                    insert_chain(td, &mut sets, &t[a], &ab);
                } else if t[b].contains(a) {
                    insert_chain(td, &mut sets, &t[b], &ab);
                } else if t[a].contains(b) {
                    insert_chain(td, &mut sets, &t[a], &ab);
                } else {
                    // Both paths share T_lca and the lca's two children, and
                    // rounding draws those jointly before either subtree.
                    let shared = t[a].intersection(&t[b]);
                    let ta = shared.with(a);
                    let tb = shared.with(b);
                    let tab = ta.with(b);
                    insert_chain(td, &mut sets, &t[a], &ta);
                    insert_chain(td, &mut sets, &t[b], &tb);
                    insert_chain(td, &mut sets, &tab, &ab);
                }
            }
        }
    }
    Ok(NodeFamily { mode, sets })
}

/// Insert `big`, `small` and a sequence of sets between them, each one node
/// smaller than the previous. Peripheral nodes (few tree neighbours inside
/// the current set) go first, deepest first, so the chain keeps as much of
/// the parent/child structure as possible.
fn insert_chain(td: &TreeDecomposition, sets: &mut BTreeSet<NodeSet>, big: &NodeSet, small: &NodeSet) {
    debug_assert!(small.is_subset(big));
    let mut cur = big.clone();
    sets.insert(cur.clone());
    loop {
        let next = cur
            .iter()
            .filter(|&k| !small.contains(k))
            .min_by_key(|&k| {
                let links = td.parent(k).is_some_and(|p| cur.contains(p)) as usize
                    + td.children(k).iter().filter(|&&c| cur.contains(c)).count();
                (links, Reverse(td.depth(k)), Reverse(k))
            });
        match next {
            Some(k) => {
                cur = cur.without(k);
                sets.insert(cur.clone());
            }
            None => break,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn path_builds_width_one() {
        let g = ConstraintGraph::path(3).unwrap();
        let td = build_tree_decomposition(&g);
        assert!(validate_tree_decomposition(&g, &td));
        assert_eq!(td.width(), 1);
        assert_eq!(td.bag(td.root()), set(&[0, 1]));
        let c_node = td.highest_node(2).unwrap();
        assert_eq!(td.bag(c_node), set(&[1, 2]));
        assert!(td.is_leaf(c_node));
        assert_eq!(td.subtree_vertices(c_node).unwrap(), set(&[1, 2]));
        assert_eq!(td.subtree_vertices(td.root()).unwrap(), set(&[0, 1, 2]));
    }

    #[test]
    fn single_vertex_and_triangle() {
        let g = ConstraintGraph::empty(1).unwrap();
        let td = build_tree_decomposition(&g);
        assert_eq!(td.len(), 1);
        assert_eq!(td.width(), 0);
        assert!(validate_tree_decomposition(&g, &td));

        let k3 = ConstraintGraph::cycle(3).unwrap();
        let td = build_tree_decomposition(&k3);
        assert_eq!(td.len(), 1);
        assert_eq!(td.bag(0), set(&[0, 1, 2]));
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn validator_rejects_bad_decompositions() {
        let g = ConstraintGraph::path(3).unwrap();
        let pad = VertexSet::EMPTY;
        let good = TreeDecomposition::from_parts(0, vec![set(&[0, 1]), set(&[1, 2]), pad], vec![vec![1, 2], vec![], vec![]]).unwrap();
        assert!(validate_tree_decomposition(&g, &good));

        let uncovered = TreeDecomposition::from_parts(0, vec![set(&[0]), set(&[1, 2]), pad], vec![vec![1, 2], vec![], vec![]]).unwrap();
        assert!(!validate_tree_decomposition(&g, &uncovered));

        // 0 appears at both ends of a path but not in the middle.
        let split = TreeDecomposition::from_parts(
            0,
            vec![set(&[0, 1]), set(&[2]), set(&[0, 1]), pad, pad],
            vec![vec![1, 3], vec![2, 4], vec![], vec![], vec![]],
        )
        .unwrap();
        assert!(!validate_tree_decomposition(&g, &split));

        let unary = TreeDecomposition::from_parts(0, vec![set(&[0, 1]), set(&[1, 2])], vec![vec![1], vec![]]).unwrap();
        assert!(!validate_tree_decomposition(&g, &unary));
    }

    fn complete_binary(levels: usize) -> TreeDecomposition {
        let count = (1 << levels) - 1;
        let children = (0..count)
            .map(|i| if 2 * i + 2 < count { vec![2 * i + 1, 2 * i + 2] } else { vec![] })
            .collect();
        TreeDecomposition::from_parts(0, vec![VertexSet::EMPTY; count], children).unwrap()
    }

    #[test]
    fn path_family_examples() {
        let td = complete_binary(3);
        assert_eq!(td.path_family(0).unwrap(), NodeSet::new([0]));
        assert_eq!(td.path_family(1).unwrap(), NodeSet::new([0, 1, 2]));
        // depth-2 node 3: path 0,1,3 plus children of 0 and of 1.
        assert_eq!(td.path_family(3).unwrap(), NodeSet::new([0, 1, 2, 3, 4]));
        assert!(matches!(td.path_family(9), Err(GcmcError::UnknownNode(9))));
    }

    #[test]
    fn path_family_nested_in_leaf_families() {
        let td = complete_binary(4);
        for i in td.nodes() {
            let ti = td.path_family(i).unwrap();
            assert!(ti.len() <= 2 * td.depth(i) + 1);
            for l in td.leaves() {
                if td.is_ancestor(i, l) {
                    assert!(ti.is_subset(&td.path_family(l).unwrap()));
                }
            }
        }
    }

    #[test]
    fn family_examples() {
        let single = complete_binary(1);
        let full = variable_family(&single, FamilyMode::Full).unwrap();
        let reduced = variable_family(&single, FamilyMode::Reduced).unwrap();
        let expect: Vec<NodeSet> = vec![NodeSet::empty(), NodeSet::new([0])];
        assert_eq!(full.iter().cloned().collect::<Vec<_>>(), expect);
        assert_eq!(reduced.iter().cloned().collect::<Vec<_>>(), expect);

        let three = complete_binary(2);
        assert_eq!(variable_family(&three, FamilyMode::Full).unwrap().len(), 8);
    }

    #[test]
    fn highest_node_and_lca() {
        let td = complete_binary(3);
        assert_eq!(td.lca(3, 4), 1);
        assert_eq!(td.lca(3, 6), 0);
        assert_eq!(td.lca(1, 4), 1);
        assert!(matches!(td.highest_node(0), Err(GcmcError::VertexNotInDecomposition(0))));
    }

    #[test]
    fn dump_round_trip() {
        let g = ConstraintGraph::cycle(5).unwrap();
        let td = build_tree_decomposition(&g);
        let json = serde_json::to_string(&td.to_dump()).unwrap();
        let back: DecompositionDump = serde_json::from_str(&json).unwrap();
        assert_eq!(TreeDecomposition::from_dump(&back).unwrap(), td);
    }

    #[test]
    fn disconnected_and_rooted_builds() {
        let g = ConstraintGraph::new(6, [(0, 1), (2, 3), (3, 4)]).unwrap();
        let td = build_tree_decomposition(&g);
        assert!(validate_tree_decomposition(&g, &td));
        let td5 = build_tree_decomposition_containing(&g, 5).unwrap();
        assert!(validate_tree_decomposition(&g, &td5));
        assert!(td5.bag(td5.root()).contains(5));
    }

    #[test]
    fn wide_nodes_are_split() {
        // Star: centre 0, leaves 1..6. Clique tree is a star of bags.
        let g = ConstraintGraph::new(7, (1..7).map(|v| (0, v))).unwrap();
        let td = build_tree_decomposition(&g);
        assert!(validate_tree_decomposition(&g, &td));
        assert_eq!(td.width(), 1);
    }
}
