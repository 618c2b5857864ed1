//! Top-down correlated rounding of an LP solution into a feasible set,
//! with exact and Monte Carlo evaluation of the output distribution.
//!
//! The root state is drawn from the `{r}` block. Each internal node `i`, in
//! breadth-first order, then draws the states of both children at once
//! from the `T_j = T_i ∪ {j, j′}` block, conditioned on the states already
//! fixed on `T_i`. Every node owns an independent random stream derived
//! from `(seed, node)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomp::{NodeId, NodeSet};
use crate::dp::{ConstraintDp, StateAssignment};
use crate::error::{GcmcError, Result};
use crate::graph::{cut_value_unchecked, Vertex, VertexSet, WeightFunction};
use crate::lp::{LpModel, VarKey};

/// Weights at or below this are treated as zero.
pub const MASS_EPS: f64 = 1e-12;
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;

type Key = Vec<usize>;

/// Child-pair state indices with their conditional weights.
type ChildWeights = Vec<((usize, usize), f64)>;

#[derive(Clone, Debug)]
struct NodePlan {
    children: (NodeId, NodeId),
    context: NodeSet,
    table: BTreeMap<Key, ChildWeights>,
}

/// Conditional tables extracted from one LP solution.
#[derive(Clone, Debug)]
pub struct RoundingPlan {
    root: NodeId,
    n_nodes: usize,
    root_dist: Vec<(usize, f64)>,
    nodes: Vec<Option<NodePlan>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundingRun {
    pub seed: u64,
    pub chosen: StateAssignment,
    pub result: VertexSet,
    /// Number of nodes where no child pair carried mass and a uniform valid
    /// pair was drawn instead.
    pub fallbacks: usize,
}

fn normalized(mut items: Vec<(Key, f64)>) -> Vec<(Key, f64)> {
    items.retain(|(_, w)| *w > MASS_EPS);
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut items {
        *w /= total;
    }
    items
}

fn block_values(model: &LpModel, values: &[f64], set: &NodeSet) -> Result<Vec<(Key, f64)>> {
    let range = model
        .y_block(set)
        .ok_or_else(|| GcmcError::FamilyMismatch(format!("model has no block for node set {:?}", set.as_slice())))?;
    Ok(range
        .map(|c| {
            let VarKey::Y { states, .. } = &model.columns()[c] else { unreachable!() };
            (states.clone(), values[c])
        })
        .collect())
}

/// `y(s(T_i))` for every assignment on `T_i` carrying more than `MASS_EPS`.
pub fn path_marginals(model: &LpModel, dp: &ConstraintDp, values: &[f64], i: NodeId) -> Result<Vec<(Key, f64)>> {
    let t = dp.td().path_family(i)?;
    let mut out = block_values(model, values, &t)?;
    out.retain(|(_, w)| *w > MASS_EPS);
    Ok(out)
}

fn draw<T: Copy>(rng: &mut ChaCha8Rng, items: &[(T, f64)]) -> T {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(x, w) in items {
        acc += w;
        if u < acc {
            return x;
        }
    }
    items.last().expect("non-empty distribution").0
}

impl RoundingPlan {
    pub fn new(model: &LpModel, dp: &ConstraintDp, values: &[f64]) -> Result<Self> {
        if values.len() != model.num_columns() {
            return Err(GcmcError::FamilyMismatch(format!(
                "expected {} LP values, got {}",
                model.num_columns(),
                values.len()
            )));
        }
        let td = dp.td();
        let root = td.root();
        let mut root_dist: Vec<(usize, f64)> = normalized(block_values(model, values, &NodeSet::new([root]))?)
            .into_iter()
            .map(|(k, w)| (k[0], w))
            .collect();
        if root_dist.is_empty() {
            let live: Vec<usize> = (0..dp.num_states(root)).filter(|&k| dp.is_live(root, k)).collect();
            if live.is_empty() {
                return Err(GcmcError::NoFeasibleSolution);
            }
            let w = 1.0 / live.len() as f64;
            root_dist = live.into_iter().map(|k| (k, w)).collect();
        }

        let mut nodes = vec![None; td.len()];
        for i in td.nodes() {
            let Some((j1, j2)) = td.child_pair(i) else { continue };
            let context = td.path_family(i)?;
            let ext = td.path_family(j1)?;
            let (p1, p2) = (ext.position(j1).unwrap(), ext.position(j2).unwrap());
            let mut raw: BTreeMap<Key, ChildWeights> = BTreeMap::new();
            for (states, w) in block_values(model, values, &ext)? {
                if w <= MASS_EPS {
                    continue;
                }
                let key: Key = ext
                    .iter()
                    .zip(&states)
                    .filter(|&(k, _)| k != j1 && k != j2)
                    .map(|(_, &s)| s)
                    .collect();
                raw.entry(key).or_default().push(((states[p1], states[p2]), w));
            }
            let table = raw
                .into_iter()
                .map(|(key, pairs)| {
                    let total: f64 = pairs.iter().map(|(_, w)| w).sum();
                    (key, pairs.into_iter().map(|(p, w)| (p, w / total)).collect())
                })
                .collect();
            nodes[i] = Some(NodePlan { children: (j1, j2), context, table });
        }
        Ok(RoundingPlan { root, n_nodes: td.len(), root_dist, nodes })
    }

    fn children_dist(&self, dp: &ConstraintDp, i: NodeId, a: &[usize]) -> (ChildWeights, bool) {
        let p = self.nodes[i].as_ref().expect("internal node");
        let key: Key = p.context.iter().map(|k| a[k]).collect();
        if let Some(d) = p.table.get(&key) {
            return (d.clone(), false);
        }
        let (j1, j2) = p.children;
        let combos: Vec<(usize, usize)> = dp
            .combos(i, a[i])
            .iter()
            .copied()
            .filter(|&(x, y)| dp.is_live(j1, x) && dp.is_live(j2, y))
            .collect();
        let w = 1.0 / combos.len() as f64;
        (combos.into_iter().map(|c| (c, w)).collect(), true)
    }

    /// One run of the sampler.
    pub fn round_once(&self, dp: &ConstraintDp, seed: u64) -> RoundingRun {
        let td = dp.td();
        let mut a = vec![usize::MAX; self.n_nodes];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        a[self.root] = draw(&mut rng, &self.root_dist);
        let mut fallbacks = 0;
        for &i in td.bfs_order() {
            let Some(p) = &self.nodes[i] else { continue };
            let (dist, fell_back) = self.children_dist(dp, i, &a);
            fallbacks += fell_back as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let (x, y) = draw(&mut rng, &dist);
            a[p.children.0] = x;
            a[p.children.1] = y;
        }
        let result = td.nodes().fold(VertexSet::EMPTY, |r, i| r.union(dp.required(i, a[i])));
        RoundingRun { seed, chosen: StateAssignment::new(a), result, fallbacks }
    }

    /// Every reachable full assignment with its probability.
    pub fn exact_distribution(&self, dp: &ConstraintDp, cap: usize) -> Result<ExactDistribution> {
        let internal: Vec<NodeId> = dp.td().bfs_order().iter().copied().filter(|&i| self.nodes[i].is_some()).collect();
        let mut outcomes = Vec::new();
        let mut a = vec![usize::MAX; self.n_nodes];

        struct Walk<'a> {
            plan: &'a RoundingPlan,
            dp: &'a ConstraintDp,
            internal: &'a [NodeId],
            cap: usize,
        }

        fn rec(w: &Walk, t: usize, p: f64, a: &mut Vec<usize>, out: &mut Vec<(StateAssignment, VertexSet, f64)>) -> Result<()> {
            if t == w.internal.len() {
                if out.len() >= w.cap {
                    return Err(GcmcError::EnumerationCap { cap: w.cap });
                }
                let r = w.dp.td().nodes().fold(VertexSet::EMPTY, |r, i| r.union(w.dp.required(i, a[i])));
                out.push((StateAssignment::new(a.clone()), r, p));
                return Ok(());
            }
            let i = w.internal[t];
            let (j1, j2) = w.plan.nodes[i].as_ref().unwrap().children;
            let (dist, _) = w.plan.children_dist(w.dp, i, a);
            for ((x, y), q) in dist {
                a[j1] = x;
                a[j2] = y;
                rec(w, t + 1, p * q, a, out)?;
            }
            a[j1] = usize::MAX;
            a[j2] = usize::MAX;
            Ok(())
        }

        let walk = Walk { plan: self, dp, internal: &internal, cap };
        for &(s, q) in &self.root_dist {
            a[self.root] = s;
            rec(&walk, 0, q, &mut a, &mut outcomes)?;
        }
        Ok(ExactDistribution { outcomes })
    }
}

/// The exact output distribution of the sampler.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    outcomes: Vec<(StateAssignment, VertexSet, f64)>,
}

impl ExactDistribution {
    pub fn outcomes(&self) -> &[(StateAssignment, VertexSet, f64)] {
        &self.outcomes
    }

    /// `Pr[R = S]` aggregated over assignments.
    pub fn set_probabilities(&self) -> BTreeMap<VertexSet, f64> {
        let mut m = BTreeMap::new();
        for &(_, r, p) in &self.outcomes {
            *m.entry(r).or_insert(0.0) += p;
        }
        m
    }

    pub fn total_mass(&self) -> f64 {
        self.outcomes.iter().map(|o| o.2).sum()
    }

    pub fn expected_cut(&self, weights: &WeightFunction) -> f64 {
        self.set_probabilities().into_iter().map(|(r, p)| p * cut_value_unchecked(weights, r)).sum()
    }

    pub fn cut_probability(&self, u: Vertex, v: Vertex) -> f64 {
        self.outcomes.iter().filter(|o| o.1.contains(u) != o.1.contains(v)).map(|o| o.2).sum()
    }

    /// `Pr[a(k) = states[t] for all t]` over the nodes of `set`.
    pub fn marginal(&self, set: &NodeSet, states: &[usize]) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| set.iter().zip(states).all(|(k, &s)| o.0.get(k) == s))
            .map(|o| o.2)
            .sum()
    }
}

pub fn exact_expected_cut(plan: &RoundingPlan, dp: &ConstraintDp, weights: &WeightFunction) -> Result<f64> {
    Ok(plan.exact_distribution(dp, DEFAULT_ENUMERATION_CAP)?.expected_cut(weights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditCase {
    /// One anchor lies in the path family of the other; the cut probability
    /// equals `z_uv`.
    Ancestor,
    /// Anchors meet only at their lowest common ancestor; the cut
    /// probability is at least `z_uv / 2`.
    Lca,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeAudit {
    pub u: Vertex,
    pub v: Vertex,
    pub anchors: (NodeId, NodeId),
    pub z_uv: f64,
    pub z_plus: f64,
    pub z_minus: f64,
    pub exact_cut_prob: f64,
    pub case: AuditCase,
    pub passes: bool,
}

pub const AUDIT_TOL: f64 = 1e-9;

pub fn per_edge_cut_audit(
    model: &LpModel,
    dp: &ConstraintDp,
    values: &[f64],
    dist: &ExactDistribution,
    u: Vertex,
    v: Vertex,
) -> Result<EdgeAudit> {
    let (u, v) = (u.min(v), u.max(v));
    let td = dp.td();
    let zc = model.z_column(u, v).ok_or(GcmcError::MissingPair(u, v))?;
    let (a, b) = (td.highest_node(u)?, td.highest_node(v)?);
    let pair = NodeSet::new([a, b]);
    let (mut z_plus, mut z_minus) = (0.0, 0.0);
    for (states, w) in block_values(model, values, &pair)? {
        let at = |k: NodeId| states[pair.position(k).unwrap()];
        let in_u = dp.required(a, at(a)).contains(u);
        let in_v = dp.required(b, at(b)).contains(v);
        match (in_u, in_v) {
            (true, false) => z_plus += w,
            (false, true) => z_minus += w,
            _ => {}
        }
    }
    let ancestor = td.path_family(b)?.contains(a) || td.path_family(a)?.contains(b);
    let case = if ancestor { AuditCase::Ancestor } else { AuditCase::Lca };
    let z_uv = values[zc];
    let p = dist.cut_probability(u, v);
    let passes = match case {
        AuditCase::Ancestor => (p - z_uv).abs() <= AUDIT_TOL,
        AuditCase::Lca => p >= z_uv / 2.0 - AUDIT_TOL,
    };
    Ok(EdgeAudit { u, v, anchors: (a, b), z_uv, z_plus, z_minus, exact_cut_prob: p, case, passes })
}

/// Audit of every weighted pair of the model.
pub fn audit_all_pairs(model: &LpModel, dp: &ConstraintDp, values: &[f64], dist: &ExactDistribution) -> Result<Vec<EdgeAudit>> {
    model
        .z_pairs()
        .map(|((u, v), _)| per_edge_cut_audit(model, dp, values, dist, u, v))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Sample mean of the cut value over seeds `first_seed..first_seed + trials`.
pub fn monte_carlo_expected_cut(
    plan: &RoundingPlan,
    dp: &ConstraintDp,
    weights: &WeightFunction,
    first_seed: u64,
    trials: usize,
) -> MonteCarloEstimate {
    let (mut sum, mut sq) = (0.0, 0.0);
    for t in 0..trials {
        let c = cut_value_unchecked(weights, plan.round_once(dp, first_seed + t as u64).result);
        sum += c;
        sq += c * c;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    MonteCarloEstimate { trials, mean, std_error: (var / n).sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalCheck {
    pub node: NodeId,
    pub states: Vec<usize>,
    pub y: f64,
    pub frequency: f64,
    pub std_error: f64,
    pub passes: bool,
}

/// Compare empirical frequencies of `a(T_i) = s(T_i)` with `y(s(T_i))` for
/// every node and every assignment with `y ≥ threshold`.
pub fn path_marginal_check(
    model: &LpModel,
    dp: &ConstraintDp,
    values: &[f64],
    plan: &RoundingPlan,
    trials: usize,
    threshold: f64,
) -> Result<Vec<MarginalCheck>> {
    let td = dp.td();
    let runs: Vec<StateAssignment> = (0..trials as u64).map(|s| plan.round_once(dp, s).chosen).collect();
    let mut out = Vec::new();
    for i in td.nodes() {
        let t = td.path_family(i)?;
        for (states, y) in path_marginals(model, dp, values, i)? {
            if y < threshold {
                continue;
            }
            let hits = runs.iter().filter(|a| t.iter().zip(&states).all(|(k, &s)| a.get(k) == s)).count();
            let frequency = hits as f64 / trials as f64;
            let std_error = (y * (1.0 - y) / trials as f64).max(0.0).sqrt();
            let passes = (frequency - y).abs() <= 3.0 * std_error + AUDIT_TOL;
            out.push(MarginalCheck { node: i, states, y, frequency, std_error, passes });
        }
    }
    Ok(out)
}

/// `Pr(X=1)Pr(Y=0) + Pr(X=0)Pr(Y=1) ≥ ½[Pr(X=0,Y=1) + Pr(X=1,Y=0)]` for a
/// joint table indexed `table[x][y]`.
pub fn check_joint_inequality(table: [[f64; 2]; 2]) -> Result<bool> {
    let flat = [table[0][0], table[0][1], table[1][0], table[1][1]];
    if flat.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(GcmcError::MalformedTable("entries must be finite and non-negative".into()));
    }
    let total: f64 = flat.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(GcmcError::MalformedTable(format!("entries sum to {total}")));
    }
    let x1 = table[1][0] + table[1][1];
    let y1 = table[0][1] + table[1][1];
    let lhs = x1 * (1.0 - y1) + (1.0 - x1) * y1;
    let rhs = 0.5 * (table[0][1] + table[1][0]);
    Ok(lhs - rhs >= -1e-12)
}
