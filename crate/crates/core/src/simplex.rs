//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! The solver works on [`StandardLp`]: maximize `c·x` subject to `Ax = b`
//! and finite bounds `l ≤ x ≤ u`. A presolve pass removes fixed columns,
//! resolves singleton rows, zeroes the support of same-sign rows with zero
//! right-hand side and merges proportional column pairs linked by a
//! two-term row. The reduced problem is solved with Dantzig pricing that
//! falls back to Bland's rule after a streak of degenerate pivots. The
//! artificial columns stay in the tableau, so the final basis inverse is
//! available to polish the basic solution by iterative refinement.

use serde::Serialize;

use crate::lp::LpModel;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Iteration limit is this factor times `rows + columns`.
    pub iteration_factor: usize,
    pub presolve: bool,
    pub refinement_steps: usize,
    /// Largest dense tableau (rows × columns after presolve) attempted.
    pub max_tableau_entries: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            bland_after: 50,
            iteration_factor: 100,
            presolve: true,
            refinement_steps: 3,
            max_tableau_entries: 150_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    /// The reduced problem exceeds `max_tableau_entries`.
    TooLarge,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Size of the problem handed to the simplex after presolve.
    pub reduced_rows: usize,
    pub reduced_columns: usize,
}

/// A sparse equality-form LP with finite bounds, maximized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StandardLp {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

impl StandardLp {
    pub fn num_columns(&self) -> usize {
        self.objective.len()
    }

    pub fn from_model(model: &LpModel) -> Self {
        StandardLp {
            objective: model.objective().to_vec(),
            lower: model.lower().to_vec(),
            upper: model.upper().to_vec(),
            rows: model.rows().iter().map(|r| r.coeffs.clone()).collect(),
            rhs: model.rows().iter().map(|r| r.rhs).collect(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn residuals(&self, x: &[f64]) -> ResidualReport {
        let max_row_residual = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().map(|&(c, a)| a * x[c]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let max_bound_violation = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        ResidualReport { max_row_residual, max_bound_violation, objective: self.evaluate(x) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_row_residual: f64,
    pub max_bound_violation: f64,
    pub objective: f64,
}

impl ResidualReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_row_residual <= tol && self.max_bound_violation <= tol
    }
}

/// Row residuals, bound violations and the objective of `values`,
/// recomputed from the model.
pub fn check_solution(model: &LpModel, values: &[f64]) -> ResidualReport {
    StandardLp::from_model(model).residuals(values)
}

pub fn solve(model: &LpModel, config: &SolverConfig) -> SolverResult {
    solve_standard(&StandardLp::from_model(model), config)
}

pub fn solve_standard(lp: &StandardLp, config: &SolverConfig) -> SolverResult {
    let n = lp.num_columns();
    let limit = config.iteration_factor * (lp.rows.len() + n).max(1);
    let infeasible = |iterations| SolverResult {
        status: SolveStatus::Infeasible,
        objective: f64::NAN,
        values: vec![0.0; n],
        iterations,
        reduced_rows: 0,
        reduced_columns: 0,
    };
    let Some(pre) = Presolve::run(lp, config) else {
        return infeasible(0);
    };
    let (reduced, cols) = pre.reduced();
    let (m, nr) = (reduced.rows.len(), reduced.num_columns());
    if m.saturating_mul(nr + m) > config.max_tableau_entries {
        let mut r = infeasible(0);
        r.status = SolveStatus::TooLarge;
        r.reduced_rows = m;
        r.reduced_columns = nr;
        return r;
    }
    let mut tab = Tableau::new(&reduced, config);
    let status = tab.run(limit);
    let iterations = tab.iterations;
    if status != SolveStatus::Optimal {
        let mut r = infeasible(iterations);
        r.status = status;
        r.reduced_rows = reduced.rows.len();
        r.reduced_columns = reduced.num_columns();
        return r;
    }
    tab.refine(&reduced, config.refinement_steps);
    let xr = tab.structural_values();
    let mut x = pre.postsolve(&cols, &xr);
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(lp.lower[j], lp.upper[j]);
    }
    SolverResult {
        status: SolveStatus::Optimal,
        objective: lp.evaluate(&x),
        values: x,
        iterations,
        reduced_rows: reduced.rows.len(),
        reduced_columns: reduced.num_columns(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ColState {
    Active,
    Fixed(f64),
    /// `x = ratio · x_target`.
    Scaled { target: usize, ratio: f64 },
}

struct Presolve {
    state: Vec<ColState>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    rows: Vec<Option<Vec<(usize, f64)>>>,
    rhs: Vec<f64>,
    order: Vec<usize>,
}

const ZERO_TOL: f64 = 1e-12;

impl Presolve {
    fn run(lp: &StandardLp, config: &SolverConfig) -> Option<Presolve> {
        let n = lp.num_columns();
        let mut p = Presolve {
            state: vec![ColState::Active; n],
            lower: lp.lower.clone(),
            upper: lp.upper.clone(),
            objective: lp.objective.clone(),
            rows: lp.rows.iter().map(|r| Some(r.clone())).collect(),
            rhs: lp.rhs.clone(),
            order: Vec::new(),
        };
        let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in lp.rows.iter().enumerate() {
            for &(c, _) in row {
                incidence[c].push(r);
            }
        }
        let tol = config.feasibility_tol;
        let mut queue: std::collections::VecDeque<usize> = (0..lp.rows.len()).collect();
        let mut queued = vec![true; lp.rows.len()];

        let fix = |p: &mut Presolve, c: usize, v: f64, incidence: &Vec<Vec<usize>>, queue: &mut std::collections::VecDeque<usize>, queued: &mut Vec<bool>| {
            p.state[c] = ColState::Fixed(v);
            p.order.push(c);
            for &r in &incidence[c] {
                if let Some(row) = p.rows[r].as_mut() {
                    if let Some(k) = row.iter().position(|&(cc, _)| cc == c) {
                        let (_, a) = row.swap_remove(k);
                        p.rhs[r] -= a * v;
                        if !queued[r] {
                            queued[r] = true;
                            queue.push_back(r);
                        }
                    }
                }
            }
        };

        if config.presolve {
            for c in 0..n {
                if p.upper[c] - p.lower[c] <= ZERO_TOL {
                    let v = p.lower[c];
                    fix(&mut p, c, v, &incidence, &mut queue, &mut queued);
                }
            }
        }

        while let Some(r) = queue.pop_front() {
            queued[r] = false;
            let Some(row) = p.rows[r].clone() else { continue };
            if row.is_empty() {
                if p.rhs[r].abs() > tol {
                    return None;
                }
                p.rows[r] = None;
                continue;
            }
            if !config.presolve {
                continue;
            }
            if row.len() == 1 {
                let (c, a) = row[0];
                let v = p.rhs[r] / a;
                if v < p.lower[c] - tol || v > p.upper[c] + tol {
                    return None;
                }
                p.rows[r] = None;
                let v = v.clamp(p.lower[c], p.upper[c]);
                fix(&mut p, c, v, &incidence, &mut queue, &mut queued);
                continue;
            }
            let same_sign = row.iter().all(|&(_, a)| a > 0.0) || row.iter().all(|&(_, a)| a < 0.0);
            if same_sign && p.rhs[r].abs() <= ZERO_TOL && row.iter().all(|&(c, _)| p.lower[c] == 0.0) {
                p.rows[r] = None;
                for &(c, _) in &row {
                    if p.state[c] == ColState::Active {
                        fix(&mut p, c, 0.0, &incidence, &mut queue, &mut queued);
                    }
                }
                continue;
            }
            if row.len() == 2 && p.rhs[r].abs() <= ZERO_TOL {
                let (k1, a1) = row[0].min_by_col(row[1]);
                let (k2, a2) = row[0].max_by_col(row[1]);
                // a1 x1 + a2 x2 = 0  ⇒  x2 = ρ x1
                let rho = -a1 / a2;
                let (lo, hi) = if rho > 0.0 {
                    (p.lower[k2] / rho, p.upper[k2] / rho)
                } else {
                    (p.upper[k2] / rho, p.lower[k2] / rho)
                };
                p.lower[k1] = p.lower[k1].max(lo);
                p.upper[k1] = p.upper[k1].min(hi);
                if p.lower[k1] > p.upper[k1] + tol {
                    return None;
                }
                if p.lower[k1] > p.upper[k1] {
                    p.upper[k1] = p.lower[k1];
                }
                p.objective[k1] += rho * p.objective[k2];
                p.objective[k2] = 0.0;
                p.state[k2] = ColState::Scaled { target: k1, ratio: rho };
                p.order.push(k2);
                p.rows[r] = None;
                let moved = std::mem::take(&mut incidence[k2]);
                for rr in moved {
                    let Some(other) = p.rows[rr].as_mut() else { continue };
                    let Some(pos) = other.iter().position(|&(c, _)| c == k2) else { continue };
                    let (_, a) = other.swap_remove(pos);
                    let add = a * rho;
                    match other.iter().position(|&(c, _)| c == k1) {
                        Some(q) => {
                            other[q].1 += add;
                            if other[q].1.abs() <= ZERO_TOL {
                                other.swap_remove(q);
                            }
                        }
                        None => {
                            other.push((k1, add));
                            incidence[k1].push(rr);
                        }
                    }
                    if !queued[rr] {
                        queued[rr] = true;
                        queue.push_back(rr);
                    }
                }
                if p.upper[k1] - p.lower[k1] <= ZERO_TOL {
                    let v = p.lower[k1];
                    fix(&mut p, k1, v, &incidence, &mut queue, &mut queued);
                }
                continue;
            }
        }
        Some(p)
    }

    /// The remaining problem, with active columns renumbered; also returns
    /// the original index of each reduced column.
    fn reduced(&self) -> (StandardLp, Vec<usize>) {
        let cols: Vec<usize> = (0..self.state.len()).filter(|&c| self.state[c] == ColState::Active).collect();
        let mut new_id = vec![usize::MAX; self.state.len()];
        for (k, &c) in cols.iter().enumerate() {
            new_id[c] = k;
        }
        let mut lp = StandardLp {
            objective: cols.iter().map(|&c| self.objective[c]).collect(),
            lower: cols.iter().map(|&c| self.lower[c]).collect(),
            upper: cols.iter().map(|&c| self.upper[c]).collect(),
            rows: Vec::new(),
            rhs: Vec::new(),
        };
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(row) = row {
                let mut mapped: Vec<(usize, f64)> = row.iter().map(|&(c, a)| (new_id[c], a)).collect();
                mapped.sort_by_key(|&(c, _)| c);
                lp.rows.push(mapped);
                lp.rhs.push(self.rhs[r]);
            }
        }
        (lp, cols)
    }

    fn postsolve(&self, cols: &[usize], xr: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.state.len()];
        for (k, &c) in cols.iter().enumerate() {
            x[c] = xr[k];
        }
        for &c in self.order.iter().rev() {
            x[c] = match self.state[c] {
                ColState::Fixed(v) => v,
                ColState::Scaled { target, ratio } => ratio * x[target],
                ColState::Active => x[c],
            };
        }
        x
    }
}

trait ByCol {
    fn min_by_col(self, other: Self) -> Self;
    fn max_by_col(self, other: Self) -> Self;
}

impl ByCol for (usize, f64) {
    fn min_by_col(self, other: Self) -> Self {
        if self.0 <= other.0 { self } else { other }
    }
    fn max_by_col(self, other: Self) -> Self {
        if self.0 <= other.0 { other } else { self }
    }
}

/// Dense bounded-variable tableau over `n` structural and `m` artificial
/// columns. Row `i` of `t` is `B⁻¹` applied to row `i` of `[A | D]`, where
/// `D` is the diagonal sign matrix of the artificial columns.
struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    rhs: Vec<f64>,
    sign: Vec<f64>,
    removed: Vec<bool>,
    iterations: usize,
    cfg: SolverConfig,
}

impl Tableau {
    fn new(lp: &StandardLp, cfg: &SolverConfig) -> Self {
        let m = lp.rows.len();
        let n = lp.num_columns();
        let width = n + m;
        let mut t = vec![0.0; m * width];
        let mut beta = vec![0.0; m];
        let mut sign = vec![1.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let mut b = lp.rhs[i];
            for &(c, a) in row {
                b -= a * lp.lower[c];
            }
            sign[i] = if b < 0.0 { -1.0 } else { 1.0 };
            for &(c, a) in row {
                t[i * width + c] += sign[i] * a;
            }
            t[i * width + n + i] = 1.0;
            beta[i] = sign[i] * b;
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut is_basic = vec![false; width];
        for i in 0..m {
            is_basic[n + i] = true;
        }
        let mut cost = lp.objective.clone();
        cost.extend(std::iter::repeat_n(0.0, m));
        Tableau {
            m,
            n,
            width,
            t,
            beta,
            basis: (n..n + m).collect(),
            at_upper: vec![false; width],
            is_basic,
            lower,
            upper,
            cost,
            d: vec![0.0; width],
            rhs: lp.rhs.clone(),
            sign,
            removed: vec![false; m],
            iterations: 0,
            cfg: cfg.clone(),
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] { self.upper[j] } else { self.lower[j] }
    }

    /// Reduced costs for objective `obj` against the current basis.
    fn price(&mut self, obj: &[f64]) {
        let w = self.width;
        self.d = obj.to_vec();
        for i in 0..self.m {
            if self.removed[i] {
                continue;
            }
            let cb = obj[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * w..(i + 1) * w];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for i in 0..self.m {
            if !self.removed[i] {
                self.d[self.basis[i]] = 0.0;
            }
        }
    }

    fn run(&mut self, limit: usize) -> SolveStatus {
        let width = self.width;
        let phase1: Vec<f64> = (0..width).map(|j| if j >= self.n { -1.0 } else { 0.0 }).collect();
        self.price(&phase1);
        if let Some(s) = self.iterate(limit) {
            return s;
        }
        let infeas: f64 = (0..self.m).filter(|&i| self.basis[i] >= self.n).map(|i| self.beta[i]).sum();
        if infeas > self.cfg.feasibility_tol {
            return SolveStatus::Infeasible;
        }
        self.drive_out_artificials();
        for j in self.n..width {
            self.upper[j] = 0.0;
            self.at_upper[j] = false;
        }
        let cost = self.cost.clone();
        self.price(&cost);
        match self.iterate(limit) {
            Some(s) => s,
            None => SolveStatus::Optimal,
        }
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.removed[r] || self.basis[r] < self.n {
                continue;
            }
            let w = self.width;
            let row = &self.t[r * w..r * w + self.n];
            let mut best: Option<(usize, f64)> = None;
            for (j, &a) in row.iter().enumerate() {
                if !self.is_basic[j] && a.abs() > 1e-7 && best.is_none_or(|(_, b)| a.abs() > b) {
                    best = Some((j, a.abs()));
                }
            }
            match best {
                Some((j, _)) => {
                    // Degenerate pivot: the artificial sits at zero.
                    let value = self.nonbasic_value(j);
                    self.pivot(r, j, value);
                }
                None => self.removed[r] = true,
            }
        }
    }

    /// Run simplex iterations on the current reduced costs until optimal (returns
    /// `None`) or the iteration limit is hit.
    fn iterate(&mut self, limit: usize) -> Option<SolveStatus> {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= limit {
                return Some(SolveStatus::IterationLimit);
            }
            let bland = degenerate >= self.cfg.bland_after;
            let (j, dir) = self.choose_entering(bland)?;
            let (step, leave) = self.ratio_test(j, dir, bland);
            if !step.is_finite() {
                // Cannot happen with finite bounds on every structural column.
                return Some(SolveStatus::IterationLimit);
            }
            self.iterations += 1;
            if step <= self.cfg.pivot_tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            match leave {
                None => {
                    // Bound flip.
                    let w = self.width;
                    for i in 0..self.m {
                        let a = self.t[i * w + j];
                        if a != 0.0 {
                            self.beta[i] -= dir * step * a;
                        }
                    }
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some(r) => {
                    let value = self.nonbasic_value(j) + dir * step;
                    let w = self.width;
                    for i in 0..self.m {
                        let a = self.t[i * w + j];
                        if a != 0.0 {
                            self.beta[i] -= dir * step * a;
                        }
                    }
                    self.pivot(r, j, value);
                }
            }
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.cfg.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.width {
            if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let dir = if !self.at_upper[j] && dj > tol {
                1.0
            } else if self.at_upper[j] && dj < -tol {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, b)| dj.abs() > b) {
                best = Some((j, dir, dj.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Largest feasible step along entering column `j` in direction `dir`,
    /// and the row that blocks it (`None` when the entering bound does).
    fn ratio_test(&self, j: usize, dir: f64, bland: bool) -> (f64, Option<usize>) {
        let w = self.width;
        let ptol = self.cfg.pivot_tol;
        let mut step = self.upper[j] - self.lower[j];
        let mut leave: Option<usize> = None;
        let mut leave_mag = 0.0;
        for i in 0..self.m {
            if self.removed[i] {
                continue;
            }
            let a = dir * self.t[i * w + j];
            let b = self.basis[i];
            let limit = if a > ptol {
                (self.beta[i] - self.lower[b]).max(0.0) / a
            } else if a < -ptol && self.upper[b].is_finite() {
                (self.upper[b] - self.beta[i]).max(0.0) / -a
            } else {
                continue;
            };
            let take = if limit < step - 1e-12 {
                true
            } else if limit <= step + 1e-12 {
                // Ties keep a pending bound flip; between rows, Bland prefers
                // the smallest basic index, Dantzig the largest pivot.
                match leave {
                    None => false,
                    Some(l) if bland => b < self.basis[l],
                    Some(_) => a.abs() > leave_mag,
                }
            } else {
                false
            };
            if take {
                step = limit.min(step);
                leave = Some(i);
                leave_mag = a.abs();
            }
        }
        (step, leave)
    }

    /// Make column `j` basic in row `r`; `value` is its new value. The leaving
    /// variable is placed at the bound it reached.
    fn pivot(&mut self, r: usize, j: usize, value: f64) {
        let w = self.width;
        let leaving = self.basis[r];
        let piv = self.t[r * w + j];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                if *v != 0.0 {
                    *v /= piv;
                }
            }
            row[j] = 1.0;
        }
        let nz: Vec<usize> = (0..w).filter(|&k| self.t[r * w + k] != 0.0).collect();
        let prow: Vec<f64> = nz.iter().map(|&k| self.t[r * w + k]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f == 0.0 {
                continue;
            }
            let base = i * w;
            for (&k, &a) in nz.iter().zip(&prow) {
                let v = self.t[base + k] - f * a;
                self.t[base + k] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
            self.t[base + j] = 0.0;
        }
        let dj = self.d[j];
        if dj != 0.0 {
            for (&k, &a) in nz.iter().zip(&prow) {
                self.d[k] -= dj * a;
            }
            self.d[j] = 0.0;
        }
        // Leaving variable goes to the nearer bound.
        let lv = self.beta[r];
        let to_upper = self.upper[leaving].is_finite() && (self.upper[leaving] - lv).abs() < (lv - self.lower[leaving]).abs();
        self.at_upper[leaving] = to_upper;
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.beta[r] = value;
        self.at_upper[j] = false;
    }

    /// Recompute basic values from the basis inverse held in the artificial
    /// columns, then apply residual corrections.
    fn refine(&mut self, lp: &StandardLp, steps: usize) {
        let w = self.width;
        let mut x = vec![0.0; self.n];
        for (j, xj) in x.iter_mut().enumerate() {
            if !self.is_basic[j] {
                *xj = self.nonbasic_value(j);
            }
        }
        for i in 0..self.m {
            if !self.removed[i] && self.basis[i] < self.n {
                x[self.basis[i]] = self.beta[i];
            }
        }
        for _ in 0..steps {
            // residual per original row, expressed in the signed row space
            let mut res = vec![0.0; self.m];
            for (i, row) in lp.rows.iter().enumerate() {
                let ax: f64 = row.iter().map(|&(c, a)| a * x[c]).sum();
                res[i] = self.sign[i] * (self.rhs[i] - ax);
            }
            for i in 0..self.m {
                if self.removed[i] || self.basis[i] >= self.n {
                    continue;
                }
                let binv = &self.t[i * w + self.n..(i + 1) * w];
                let delta: f64 = binv.iter().zip(&res).map(|(a, r)| a * r).sum();
                x[self.basis[i]] += delta;
            }
        }
        for i in 0..self.m {
            if !self.removed[i] && self.basis[i] < self.n {
                self.beta[i] = x[self.basis[i]];
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (j, xj) in x.iter_mut().enumerate() {
            if !self.is_basic[j] {
                *xj = self.nonbasic_value(j);
            }
        }
        for i in 0..self.m {
            if !self.removed[i] && self.basis[i] < self.n {
                x[self.basis[i]] = self.beta[i];
            }
        }
        x
    }
}
