//! End-to-end solve: decomposition, state spaces, variable family, LP,
//! simplex, rounding plan.

use serde::Serialize;

use crate::decomp::{
    anchor_pairs, build_tree_decomposition, build_tree_decomposition_containing, variable_family_for_anchors, FamilyMode,
    NodeFamily, TreeDecomposition,
};
use crate::dp::{state_cap_from_env, ConstraintDp};
use crate::error::{GcmcError, Result};
use crate::graph::{Instance, Vertex};
use crate::lp::{build_lp_with_cap, exclude_root_vertex, force_root_vertex, lp_statistics, LpModel, LpStatistics, VarKey, DEFAULT_COLUMN_CAP};
use crate::rounding::{RoundingPlan, DEFAULT_ENUMERATION_CAP};
use crate::simplex::{check_solution, solve, ResidualReport, SolveStatus, SolverConfig};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub family: FamilyMode,
    pub state_cap: usize,
    pub column_cap: usize,
    pub enumeration_cap: usize,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            family: FamilyMode::Reduced,
            state_cap: state_cap_from_env(),
            column_cap: DEFAULT_COLUMN_CAP,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            solver: SolverConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_family(mut self, family: FamilyMode) -> Self {
        self.family = family;
        self
    }
}

/// Everything produced by one solve, kept for inspection and rounding.
#[derive(Clone, Debug)]
pub struct SolvedInstance {
    pub instance: Instance,
    pub dp: ConstraintDp,
    pub family: NodeFamily,
    pub model: LpModel,
    pub values: Vec<f64>,
    pub lp_value: f64,
    pub iterations: usize,
    pub residuals: ResidualReport,
    pub plan: RoundingPlan,
}

impl SolvedInstance {
    pub fn td(&self) -> &TreeDecomposition {
        self.dp.td()
    }

    pub fn statistics(&self) -> LpStatistics {
        lp_statistics(&self.model)
    }

    /// True when every `y` value is within `tol` of 0 or 1.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.model
            .columns()
            .iter()
            .zip(&self.values)
            .filter(|(k, _)| matches!(k, VarKey::Y { .. }))
            .all(|(_, &x)| x.abs() <= tol || (x - 1.0).abs() <= tol)
    }
}

/// A constraint on one root-bag vertex, applied by fixing root columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootFix {
    Force(Vertex),
    Exclude(Vertex),
}

impl RootFix {
    pub fn vertex(self) -> Vertex {
        match self {
            RootFix::Force(v) | RootFix::Exclude(v) => v,
        }
    }
}

/// Full pipeline with a freshly built decomposition.
pub fn solve_instance(instance: &Instance, config: &PipelineConfig) -> Result<SolvedInstance> {
    let td = build_tree_decomposition(&instance.graph);
    solve_with_decomposition(instance, td, config, None)
}

/// Full pipeline on a decomposition rooted at a bag containing the fixed
/// vertex.
pub fn solve_fixing(instance: &Instance, fix: RootFix, config: &PipelineConfig) -> Result<SolvedInstance> {
    let td = build_tree_decomposition_containing(&instance.graph, fix.vertex())?;
    solve_with_decomposition(instance, td, config, Some(fix))
}

pub fn solve_with_decomposition(
    instance: &Instance,
    td: TreeDecomposition,
    config: &PipelineConfig,
    fix: Option<RootFix>,
) -> Result<SolvedInstance> {
    let dp = ConstraintDp::with_cap(&instance.graph, &td, instance.constraint, config.state_cap)?;
    let anchors = anchor_pairs(&td, instance.weights.positive_pairs().map(|(p, _)| p))?;
    let family = variable_family_for_anchors(&td, config.family, &anchors)?;
    let mut model = build_lp_with_cap(instance, &dp, &family, config.column_cap)?;
    match fix {
        Some(RootFix::Force(v)) => model = force_root_vertex(model, &dp, v)?,
        Some(RootFix::Exclude(v)) => model = exclude_root_vertex(model, &dp, v)?,
        None => {}
    }
    let result = solve(&model, &config.solver);
    match result.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(GcmcError::NoFeasibleSolution),
        SolveStatus::TooLarge => {
            return Err(GcmcError::TableauTooLarge { rows: result.reduced_rows, columns: result.reduced_columns })
        }
        SolveStatus::IterationLimit => {
            return Err(GcmcError::Solver(format!("iteration limit reached after {} pivots", result.iterations)))
        }
    }
    let residuals = check_solution(&model, &result.values);
    let plan = RoundingPlan::new(&model, &dp, &result.values)?;
    Ok(SolvedInstance {
        instance: instance.clone(),
        dp,
        family,
        model,
        lp_value: result.objective,
        values: result.values,
        iterations: result.iterations,
        residuals,
        plan,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub constraint: String,
    pub family: FamilyMode,
    pub seed: u64,
    pub nodes: usize,
    pub width: usize,
    pub lp: LpStatistics,
    pub lp_value: f64,
    pub solution: Vec<Vertex>,
    pub cut_value: f64,
    pub feasible: bool,
}

/// Solve and round once with `seed`.
pub fn solve_report(instance: &Instance, config: &PipelineConfig, seed: u64) -> Result<SolveReport> {
    Ok(solve_instance(instance, config)?.report(seed))
}

impl SolvedInstance {
    /// Round once with `seed` and summarize.
    pub fn report(&self, seed: u64) -> SolveReport {
        let run = self.plan.round_once(&self.dp, seed);
        SolveReport {
            constraint: self.instance.constraint.name().to_string(),
            family: self.family.mode(),
            seed,
            nodes: self.td().len(),
            width: self.td().width(),
            lp: self.statistics(),
            lp_value: self.lp_value,
            solution: run.result.to_vec(),
            cut_value: self.instance.cut(run.result),
            feasible: self.instance.is_feasible(run.result),
        }
    }
}
