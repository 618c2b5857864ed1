//! The lifted LP: one `y` column per node set of the variable family and
//! per joint state assignment on it, one `z` column per weighted vertex
//! pair, equality rows for normalization, marginal consistency and cut
//! definitions, and `[0, 1]` bounds on every column.
//!
//! Assignments that no integral solution can induce are never
//! materialized. A joint assignment on `N` is generated only when every
//! state is usable, every node agrees with its nearest ancestor in `N`
//! through some chain of live combinations, and every node of `N` whose
//! two children are also in `N` sees a valid combination. All three
//! conditions hold for the state vector of any feasible set, and they are
//! inherited by subsets of `N`, so each consistency row stays well formed.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::decomp::{NodeFamily, NodeId, NodeSet, TreeDecomposition};
use crate::dp::ConstraintDp;
use crate::error::{GcmcError, Result};
use crate::graph::{Instance, Vertex, VertexSet};

pub const DEFAULT_COLUMN_CAP: usize = 400_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// Joint event "node `nodes[t]` is in state `states[t]` for every `t`".
    Y { nodes: NodeSet, states: Vec<usize> },
    /// Probability that the pair `{u, v}` is cut (`u < v`).
    Z { u: Vertex, v: Vertex },
}

impl VarKey {
    /// Canonical column name, e.g. `y_0.1.2__3.0.1` or `z_0_4`.
    pub fn name(&self) -> String {
        match self {
            VarKey::Y { nodes, states } => {
                let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(".");
                format!("y_{}__{}", join(&mut nodes.iter()), join(&mut states.iter().copied()))
            }
            VarKey::Z { u, v } => format!("z_{u}_{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RowKind {
    Normalization,
    Consistency { base: Vec<NodeId>, added: NodeId },
    CutDefinition { u: Vertex, v: Vertex },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: RowKind,
}

/// A pure-equality LP with box bounds, maximized.
#[derive(Clone, Debug)]
pub struct LpModel {
    columns: Vec<VarKey>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
    root: NodeId,
    blocks: BTreeMap<NodeSet, (usize, usize)>,
    index: HashMap<VarKey, usize>,
    z_index: BTreeMap<(Vertex, Vertex), usize>,
    combo_fixings: u128,
    leaf_fixings: usize,
}

impl LpModel {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[VarKey] {
        &self.columns
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn column_of(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Columns of the `y` block for node set `n`, as a contiguous range.
    pub fn y_block(&self, n: &NodeSet) -> Option<std::ops::Range<usize>> {
        self.blocks.get(n).map(|&(a, b)| a..b)
    }

    pub fn z_column(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.z_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn z_pairs(&self) -> impl Iterator<Item = ((Vertex, Vertex), usize)> + '_ {
        self.z_index.iter().map(|(&p, &c)| (p, c))
    }

    /// Objective `Σ c·x` for a column vector.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Tighten the upper bound of one column (used for forcing).
    pub fn fix_to_zero(&mut self, col: usize) {
        self.upper[col] = 0.0;
    }

    /// Human-readable model in CPLEX LP syntax.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = self.columns.iter().map(VarKey::name).collect();
        let term = |out: &mut String, first: bool, c: f64, name: &str| {
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == 1.0 {
                let _ = write!(out, " {sign} {name}");
            } else {
                let _ = write!(out, " {sign} {mag} {name}");
            }
        };
        out.push_str("Maximize\n obj:");
        let mut first = true;
        for (c, &w) in self.objective.iter().enumerate() {
            if w != 0.0 {
                term(&mut out, first, w, &names[c]);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{r}:");
            for (k, &(c, a)) in row.coeffs.iter().enumerate() {
                term(&mut out, k == 0, a, &names[c]);
            }
            if row.coeffs.is_empty() {
                out.push_str(" 0 ");
                out.push_str(&names.first().cloned().unwrap_or_default());
            }
            let _ = writeln!(out, " = {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (c, name) in names.iter().enumerate() {
            let _ = writeln!(out, " {} <= {name} <= {}", self.lower[c], self.upper[c]);
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpStatistics {
    pub columns: usize,
    pub y_columns: usize,
    pub z_columns: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub family_sets: usize,
    /// `Σ_i Σ_σ |Σ_j × Σ_j′ ∖ ℱ_{i,σ}|`: child-pair assignments excluded by
    /// the combination rule.
    pub combo_fixings: u128,
    /// Leaf states with empty `ℋ`.
    pub leaf_fixings: usize,
}

pub fn lp_statistics(model: &LpModel) -> LpStatistics {
    let z = model.z_index.len();
    LpStatistics {
        columns: model.num_columns(),
        y_columns: model.num_columns() - z,
        z_columns: z,
        rows: model.num_rows(),
        nonzeros: model.rows.iter().map(|r| r.coeffs.len()).sum(),
        family_sets: model.blocks.len() + 1,
        combo_fixings: model.combo_fixings,
        leaf_fixings: model.leaf_fixings,
    }
}

/// Dense bit matrix: row `x` holds the set of compatible column states.
#[derive(Clone, Debug)]
struct BitMatrix {
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        BitMatrix { words, bits: vec![0; rows * words] }
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] |= 1 << (c % 64);
    }

    fn row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.bits[r * self.words..(r + 1) * self.words]
            .iter()
            .enumerate()
            .flat_map(|(w, &word)| {
                let mut b = word;
                std::iter::from_fn(move || {
                    if b == 0 {
                        return None;
                    }
                    let t = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * 64 + t)
                })
            })
    }

    fn compose(&self, other: &BitMatrix, rows: usize) -> BitMatrix {
        let mut out = BitMatrix { words: other.words, bits: vec![0; rows * other.words] };
        for r in 0..rows {
            for mid in self.row(r) {
                for w in 0..other.words {
                    out.bits[r * other.words + w] |= other.bits[mid * other.words + w];
                }
            }
        }
        out
    }
}

/// Ancestor-descendant state compatibility: `(σ_p, σ_k)` is compatible when
/// a chain of live combinations links them along the tree path.
struct Compatibility {
    rel: HashMap<(NodeId, NodeId), BitMatrix>,
}

impl Compatibility {
    fn new(dp: &ConstraintDp) -> Self {
        let td = dp.td();
        let mut rel: HashMap<(NodeId, NodeId), BitMatrix> = HashMap::new();
        for &k in td.bfs_order() {
            let Some(p) = td.parent(k) else { continue };
            let (a, b) = td.child_pair(p).expect("binary decomposition");
            let mut step = BitMatrix::new(dp.num_states(p), dp.num_states(k));
            for sigma in dp.usable_states(p) {
                for &(x, y) in dp.combos(p, sigma) {
                    if dp.is_live(a, x) && dp.is_live(b, y) {
                        step.set(sigma, if k == a { x } else { y });
                    }
                }
            }
            let mut anc = td.parent(p);
            let mut composed = Vec::new();
            while let Some(q) = anc {
                let m = rel[&(q, p)].compose(&step, dp.num_states(q));
                composed.push((q, m));
                anc = td.parent(q);
            }
            rel.insert((p, k), step);
            for (q, m) in composed {
                rel.insert((q, k), m);
            }
        }
        Compatibility { rel }
    }

    fn get(&self, p: NodeId, k: NodeId) -> &BitMatrix {
        &self.rel[&(p, k)]
    }
}

fn nearest_ancestor_in(td: &TreeDecomposition, nodes: &NodeSet, k: NodeId) -> Option<NodeId> {
    let mut cur = td.parent(k);
    while let Some(p) = cur {
        if nodes.contains(p) {
            return Some(p);
        }
        cur = td.parent(p);
    }
    None
}

/// Admissible joint assignments on `nodes`, in lexicographic order of the
/// state vector.
fn enumerate_assignments(
    dp: &ConstraintDp,
    compat: &Compatibility,
    nodes: &NodeSet,
    budget: usize,
    cap: usize,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    let td = dp.td();
    let list = nodes.as_slice();
    let anc: Vec<Option<usize>> = list
        .iter()
        .map(|&k| nearest_ancestor_in(td, nodes, k).map(|p| nodes.position(p).unwrap()))
        .collect();
    // For a node that is the second child of a parent in `nodes` whose first
    // child is also present: (parent position, first-child position).
    let triple: Vec<Option<(usize, usize)>> = list
        .iter()
        .map(|&k| {
            let p = td.parent(k)?;
            let (a, b) = td.child_pair(p)?;
            if b != k {
                return None;
            }
            Some((nodes.position(p)?, nodes.position(a)?))
        })
        .collect();

    struct Ctx<'a> {
        dp: &'a ConstraintDp,
        compat: &'a Compatibility,
        list: &'a [NodeId],
        anc: &'a [Option<usize>],
        triple: &'a [Option<(usize, usize)>],
        budget: usize,
        cap: usize,
    }

    fn rec(ctx: &Ctx, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> Result<()> {
        if t == ctx.list.len() {
            if out.len() >= ctx.budget {
                return Err(GcmcError::ColumnCap { cap: ctx.cap });
            }
            out.push(cur.clone());
            return Ok(());
        }
        let k = ctx.list[t];
        let candidates: Vec<usize> = match ctx.anc[t] {
            Some(pa) => ctx.compat.get(ctx.list[pa], k).row(cur[pa]).collect(),
            None => ctx.dp.usable_states(k).collect(),
        };
        for s in candidates {
            if let Some((pp, pa)) = ctx.triple[t] {
                if !ctx.dp.is_valid_combo(ctx.list[pp], cur[pp], cur[pa], s) {
                    continue;
                }
            }
            cur.push(s);
            rec(ctx, t + 1, cur, out)?;
            cur.pop();
        }
        Ok(())
    }

    let ctx = Ctx { dp, compat, list, anc: &anc, triple: &triple, budget, cap };
    rec(&ctx, 0, &mut Vec::with_capacity(list.len()), out)
}

/// Build the LP for `instance` over `family`, with the default column cap.
pub fn build_lp(instance: &Instance, dp: &ConstraintDp, family: &NodeFamily) -> Result<LpModel> {
    build_lp_with_cap(instance, dp, family, DEFAULT_COLUMN_CAP)
}

pub fn build_lp_with_cap(instance: &Instance, dp: &ConstraintDp, family: &NodeFamily, cap: usize) -> Result<LpModel> {
    let td = dp.td();
    if instance.n() != dp.graph().n() || instance.constraint != dp.constraint() {
        return Err(GcmcError::FamilyMismatch("instance and DP disagree".into()));
    }
    if family.iter().any(|s| s.iter().any(|k| k >= td.len())) {
        return Err(GcmcError::FamilyMismatch("family references unknown nodes".into()));
    }
    let root = td.root();
    if !family.contains(&NodeSet::new([root])) {
        return Err(GcmcError::FamilyMismatch("family lacks the root singleton".into()));
    }
    let compat = Compatibility::new(dp);

    let mut columns = Vec::new();
    let mut blocks = BTreeMap::new();
    let mut index = HashMap::new();
    for set in family.iter().filter(|s| !s.is_empty()) {
        let mut assigns = Vec::new();
        enumerate_assignments(dp, &compat, set, cap.saturating_sub(columns.len()), cap, &mut assigns)?;
        let start = columns.len();
        for states in assigns {
            let key = VarKey::Y { nodes: set.clone(), states };
            index.insert(key.clone(), columns.len());
            columns.push(key);
        }
        blocks.insert(set.clone(), (start, columns.len()));
    }

    let mut rows = Vec::new();
    let (r0, r1) = blocks[&NodeSet::new([root])];
    rows.push(Row { coeffs: (r0..r1).map(|c| (c, 1.0)).collect(), rhs: 1.0, kind: RowKind::Normalization });

    for (base, &(b0, b1)) in &blocks {
        for added in td.nodes().filter(|&i| !base.contains(i)) {
            let ext = base.with(added);
            let Some(&(e0, e1)) = blocks.get(&ext) else { continue };
            let pos = ext.position(added).unwrap();
            let first = rows.len();
            for c in b0..b1 {
                rows.push(Row {
                    coeffs: vec![(c, 1.0)],
                    rhs: 0.0,
                    kind: RowKind::Consistency { base: base.as_slice().to_vec(), added },
                });
            }
            for (c, col) in (e0..e1).zip(&columns[e0..e1]) {
                let VarKey::Y { states, .. } = col else { unreachable!() };
                let mut restricted = states.clone();
                restricted.remove(pos);
                let key = VarKey::Y { nodes: base.clone(), states: restricted };
                let Some(&bc) = index.get(&key) else {
                    return Err(GcmcError::FamilyMismatch(format!("extension column {} has no restriction", col.name())));
                };
                rows[first + (bc - b0)].coeffs.push((c, -1.0));
            }
        }
    }

    let mut z_index = BTreeMap::new();
    let mut objective = vec![0.0; columns.len()];
    for ((u, v), w) in instance.weights.positive_pairs() {
        let (a, b) = (td.highest_node(u)?, td.highest_node(v)?);
        let pair = NodeSet::new([a, b]);
        let Some(&(p0, p1)) = blocks.get(&pair) else {
            return Err(GcmcError::FamilyMismatch(format!("family lacks the anchor set of pair ({u}, {v})")));
        };
        let zc = columns.len();
        columns.push(VarKey::Z { u, v });
        objective.push(w);
        z_index.insert((u, v), zc);
        let mut coeffs = vec![(zc, 1.0)];
        for (c, col) in (p0..p1).zip(&columns[p0..p1]) {
            let VarKey::Y { states, .. } = col else { unreachable!() };
            let state_of = |node: NodeId| states[pair.position(node).unwrap()];
            let in_u = dp.required(a, state_of(a)).contains(u);
            let in_v = dp.required(b, state_of(b)).contains(v);
            if in_u != in_v {
                coeffs.push((c, -1.0));
            }
        }
        rows.push(Row { coeffs, rhs: 0.0, kind: RowKind::CutDefinition { u, v } });
    }
    for (key, &c) in &z_index {
        index.insert(VarKey::Z { u: key.0, v: key.1 }, c);
    }

    let mut combo_fixings = 0u128;
    let mut leaf_fixings = 0usize;
    for i in td.nodes() {
        match td.child_pair(i) {
            Some((a, b)) => {
                let total = (dp.num_states(a) * dp.num_states(b)) as u128;
                for k in 0..dp.num_states(i) {
                    combo_fixings += total - dp.combos(i, k).len() as u128;
                }
            }
            None => {
                leaf_fixings += (0..dp.num_states(i)).filter(|&k| !dp.leaf_feasible(i, k).unwrap()).count();
            }
        }
    }

    let count = columns.len();
    Ok(LpModel {
        columns,
        objective,
        lower: vec![0.0; count],
        upper: vec![1.0; count],
        rows,
        root,
        blocks,
        index,
        z_index,
        combo_fixings,
        leaf_fixings,
    })
}

/// Indicator vector of the state vector of a feasible set `s`.
pub fn embed_integral_solution(model: &LpModel, dp: &ConstraintDp, s: VertexSet) -> Result<Vec<f64>> {
    let b = dp.states_of_solution(s)?;
    let mut x = vec![0.0; model.num_columns()];
    for (set, &(c0, _)) in &model.blocks {
        let states: Vec<usize> = set.iter().map(|k| b.get(k)).collect();
        let key = VarKey::Y { nodes: set.clone(), states };
        let c = model
            .column_of(&key)
            .ok_or_else(|| GcmcError::FamilyMismatch(format!("solution state vector {} was pruned", key.name())))?;
        debug_assert!(c >= c0);
        x[c] = 1.0;
    }
    for (&(u, v), &c) in &model.z_index {
        if s.contains(u) != s.contains(v) {
            x[c] = 1.0;
        }
    }
    Ok(x)
}

fn root_columns(model: &LpModel, dp: &ConstraintDp, v: Vertex) -> Result<std::ops::Range<usize>> {
    let root = dp.td().root();
    if !dp.td().bag(root).contains(v) {
        return Err(GcmcError::InvalidDecomposition(format!("vertex {v} is not in the root bag")));
    }
    model
        .y_block(&NodeSet::new([root]))
        .ok_or_else(|| GcmcError::FamilyMismatch("model has no root block".into()))
}

/// Fix to zero every root-state column whose required set omits `v`.
pub fn force_root_vertex(mut model: LpModel, dp: &ConstraintDp, v: Vertex) -> Result<LpModel> {
    let root = dp.td().root();
    for c in root_columns(&model, dp, v)? {
        let VarKey::Y { states, .. } = &model.columns[c] else { unreachable!() };
        if !dp.required(root, states[0]).contains(v) {
            model.fix_to_zero(c);
        }
    }
    Ok(model)
}

/// Fix to zero every root-state column whose required set contains `v`.
pub fn exclude_root_vertex(mut model: LpModel, dp: &ConstraintDp, v: Vertex) -> Result<LpModel> {
    let root = dp.td().root();
    for c in root_columns(&model, dp, v)? {
        let VarKey::Y { states, .. } = &model.columns[c] else { unreachable!() };
        if dp.required(root, states[0]).contains(v) {
            model.fix_to_zero(c);
        }
    }
    Ok(model)
}
