//! Exhaustive ground truth over all `2^n` vertex subsets.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{GcmcError, Result};
use crate::graph::{cut_value_unchecked, is_feasible, Constraint, ConstraintGraph, Instance, Vertex, VertexSet};
use crate::pipeline::{solve_instance, PipelineConfig, SolvedInstance};
use crate::rounding::{audit_all_pairs, monte_carlo_expected_cut, AuditCase, EdgeAudit};

pub const MAX_BRUTE_FORCE_VERTICES: usize = 24;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_VERTICES {
        Err(GcmcError::EnumerationTooLarge { n, max: MAX_BRUTE_FORCE_VERTICES })
    } else {
        Ok(())
    }
}

/// Every feasible set, in increasing bitmask order.
pub fn feasible_sets(g: &ConstraintGraph, constraint: Constraint) -> Result<Vec<VertexSet>> {
    check_size(g.n())?;
    Ok(g.vertices().subsets().filter(|&s| is_feasible(g, constraint, s)).collect())
}

fn better(value: f64, s: VertexSet, best: &Option<(VertexSet, f64)>) -> bool {
    match best {
        None => true,
        Some((t, b)) => match value.partial_cmp(b) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => s.canonical_cmp(t) == Ordering::Less,
            _ => false,
        },
    }
}

/// `(S*, OPT)`: the maximum cut over feasible sets. Ties go to the first set
/// in canonical order (smaller sets first, then lexicographic).
pub fn brute_force_opt(instance: &Instance) -> Result<(VertexSet, f64)> {
    let mut best = None;
    for s in feasible_sets(&instance.graph, instance.constraint)? {
        let v = cut_value_unchecked(&instance.weights, s);
        if better(v, s, &best) {
            best = Some((s, v));
        }
    }
    best.ok_or(GcmcError::NoFeasibleSolution)
}

/// Maximum of `Σ_{u∈S} f(u)` over feasible sets, summed in vertex order.
pub fn brute_force_linear(g: &ConstraintGraph, constraint: Constraint, f: &[f64]) -> Result<(VertexSet, f64)> {
    if f.len() != g.n() {
        return Err(GcmcError::InvalidWeights(format!("expected {} vertex weights, got {}", g.n(), f.len())));
    }
    let mut best = None;
    for s in feasible_sets(g, constraint)? {
        let v: f64 = s.iter().map(|u| f[u]).sum();
        if better(v, s, &best) {
            best = Some((s, v));
        }
    }
    best.ok_or(GcmcError::NoFeasibleSolution)
}

/// `expected / opt`, defined as 1 when both vanish.
pub fn approximation_ratio(expected: f64, opt: f64) -> f64 {
    if opt.abs() <= 1e-12 {
        1.0
    } else {
        expected / opt
    }
}

#[derive(Clone, Debug)]
pub struct CertifyConfig {
    pub pipeline: PipelineConfig,
    /// First seed of the Monte Carlo fallback.
    pub seed: u64,
    /// Monte Carlo sample size when the distribution is not enumerable.
    pub trials: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { pipeline: PipelineConfig::default(), seed: 0, trials: 50_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSummary {
    pub pairs: usize,
    pub ancestor_case: usize,
    pub lca_case: usize,
    pub failures: usize,
    /// Largest `|Pr[cut] − z_uv|` over ancestor-case pairs.
    pub max_ancestor_gap: f64,
    /// Smallest `Pr[cut] − z_uv / 2` over lca-case pairs.
    pub min_lca_slack: Option<f64>,
}

impl AuditSummary {
    pub fn from_audits(audits: &[EdgeAudit]) -> Self {
        let anc: Vec<&EdgeAudit> = audits.iter().filter(|a| a.case == AuditCase::Ancestor).collect();
        let lca: Vec<&EdgeAudit> = audits.iter().filter(|a| a.case == AuditCase::Lca).collect();
        AuditSummary {
            pairs: audits.len(),
            ancestor_case: anc.len(),
            lca_case: lca.len(),
            failures: audits.iter().filter(|a| !a.passes).count(),
            max_ancestor_gap: anc.iter().map(|a| (a.exact_cut_prob - a.z_uv).abs()).fold(0.0, f64::max),
            min_lca_slack: lca.iter().map(|a| a.exact_cut_prob - a.z_uv / 2.0).reduce(f64::min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub opt_value: f64,
    pub opt_set: Vec<Vertex>,
    pub feasible_count: usize,
    pub lp_value: f64,
    pub expected_cut: f64,
    pub expectation: ExpectationMode,
    /// Standard error of `expected_cut` (zero when exact).
    pub std_error: f64,
    pub ratio: f64,
    pub integral_lp: bool,
    pub audit: Option<AuditSummary>,
}

impl OracleReport {
    /// `lp_value ≥ OPT − tol`.
    pub fn relaxation_holds(&self, tol: f64) -> bool {
        self.lp_value >= self.opt_value - tol
    }

    /// `E[cut] ≥ LP / 2 − tol`, with `tol` widened by three standard errors
    /// for Monte Carlo estimates.
    pub fn half_guarantee_holds(&self, tol: f64) -> bool {
        self.expected_cut >= 0.5 * self.lp_value - tol - 3.0 * self.std_error
    }
}

/// Solve, round and compare against brute force.
pub fn certify_instance(instance: &Instance, config: &CertifyConfig) -> Result<OracleReport> {
    let solved = solve_instance(instance, &config.pipeline)?;
    certify_solved(&solved, config)
}

pub fn certify_solved(solved: &SolvedInstance, config: &CertifyConfig) -> Result<OracleReport> {
    let instance = &solved.instance;
    let (opt_set, opt_value) = brute_force_opt(instance)?;
    let feasible_count = feasible_sets(&instance.graph, instance.constraint)?.len();
    let (expected_cut, expectation, std_error, audit) =
        match solved.plan.exact_distribution(&solved.dp, config.pipeline.enumeration_cap) {
            Ok(dist) => {
                let audits = audit_all_pairs(&solved.model, &solved.dp, &solved.values, &dist)?;
                (dist.expected_cut(&instance.weights), ExpectationMode::Exact, 0.0, Some(AuditSummary::from_audits(&audits)))
            }
            Err(GcmcError::EnumerationCap { .. }) => {
                let mc = monte_carlo_expected_cut(&solved.plan, &solved.dp, &instance.weights, config.seed, config.trials);
                (mc.mean, ExpectationMode::MonteCarlo, mc.std_error, None)
            }
            Err(e) => return Err(e),
        };
    Ok(OracleReport {
        opt_value,
        opt_set: opt_set.to_vec(),
        feasible_count,
        lp_value: solved.lp_value,
        expected_cut,
        expectation,
        std_error,
        ratio: approximation_ratio(expected_cut, opt_value),
        integral_lp: solved.is_integral(1e-9),
        audit,
    })
}
