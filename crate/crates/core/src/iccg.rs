//! Two-stage planning loop: a master problem over lines and stations with
//! one operational copy per retained worst case, alternated with the
//! worst-case subproblem of the master's plan.
//!
//! The inexact variant solves masters to a relative gap and keeps a lower
//! bound cut `f + η ≥ lb_bar` on them. When the master incumbent is already
//! close to the best known upper bound the loop backtracks to the last
//! iteration with a certified lower bound and tightens the master gap
//! instead of adding a scenario.
//!
//! With the cut in place the exact master value is `max(v, lb_bar)`, where
//! `v` is the value without the cut, since `η` can always be raised. A proof
//! bound is therefore a certified global lower bound when `lb_bar` itself
//! was certified, or when the bound lies strictly above `lb_bar`.


use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{investment_coefficients, investment_cost, NetworkInstance, PlanningDecision};
use crate::milp::{solve_mip, LinExpr, MixedIntegerProgram, Relation, Sense, SolveOptions, SolveStatus, VarId};
use crate::operations::{build_operation, surrogate_gap_bound, OpsConfig, PlanInput};
use crate::subproblem::{oracle_subproblem_bruteforce, solve_subproblem, SubproblemConfig, SubproblemResult};
use crate::topology::{build_radiality_constraints, enumerate_radial_topologies};
use crate::uncertainty::{AmbiguitySet, BoxSet, NodalData};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IccgParams {
    /// Final relative gap.
    pub epsilon: f64,
    /// Exploitation trigger, in `(0, ε/(ε+1))`.
    pub epsilon_tilde: f64,
    /// Initial master gap. Zero gives exact masters.
    pub master_gap0: f64,
    /// Master gap shrink factor on each backtrack.
    pub alpha: f64,
    pub max_iterations: usize,
    pub max_scenarios: usize,
    /// Master gaps below this are rounded to zero.
    pub gap_floor: f64,
}

impl Default for IccgParams {
    fn default() -> Self {
        IccgParams {
            epsilon: 0.01,
            epsilon_tilde: 0.005,
            master_gap0: 0.05,
            alpha: 0.5,
            max_iterations: 60,
            max_scenarios: 40,
            gap_floor: 1e-6,
        }
    }
}

impl IccgParams {
    pub fn validate(&self) -> Result<()> {
        let e = self.epsilon;
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::Domain(format!("epsilon {e} outside (0, 1)")));
        }
        let cap = e / (e + 1.0);
        if !(self.epsilon_tilde > 0.0 && self.epsilon_tilde < cap) {
            return Err(Error::Domain(format!(
                "epsilon-tilde {} outside (0, {cap})",
                self.epsilon_tilde
            )));
        }
        if !(0.0..1.0).contains(&self.master_gap0) {
            return Err(Error::Domain(format!("master gap {} outside [0, 1)", self.master_gap0)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.max_iterations == 0 || self.max_scenarios == 0 {
            return Err(Error::Domain("iteration and scenario caps must be positive".into()));
        }
        if !(self.gap_floor > 0.0) {
            return Err(Error::Domain("gap floor must be positive".into()));
        }
        Ok(())
    }

    /// Upper bound on the number of backtracks before masters become exact,
    /// plus the one backtrack that can still happen at gap zero.
    pub fn max_backtracks(&self) -> usize {
        if self.master_gap0 <= self.gap_floor {
            return 1;
        }
        ((self.gap_floor / self.master_gap0).ln() / self.alpha.ln()).ceil() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Exploration,
    Exploitation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Exploration => "exploration",
            Phase::Exploitation => "exploitation",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub phase: Phase,
    /// Master proof bound.
    pub lb: f64,
    /// Master incumbent value.
    pub ub: f64,
    pub ub_bar: f64,
    /// Cut level the master was solved with; `-inf` when absent.
    pub lb_bar: f64,
    pub master_gap: f64,
    /// `D*` of the master plan; `inf` when the plan can be made infeasible.
    pub subproblem_value: f64,
    /// `lb` is a certified global lower bound.
    pub valid: bool,
    /// Best certified lower bound so far.
    pub lb_valid: f64,
    pub last_valid: Option<usize>,
    pub scenarios: usize,
    pub wall_ms: f64,
    /// Master branch-and-bound nodes.
    pub nodes: u64,
    pub subproblem_nodes: u64,
}

/// A retained worst case: box deviation plus scenario probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedScenario {
    pub delta: Vec<f64>,
    pub pi: Vec<f64>,
}

/// Everything the loop needs besides the algorithm parameters.
#[derive(Debug, Clone)]
pub struct PlanningProblem<'a> {
    pub inst: &'a NetworkInstance,
    pub boxset: BoxSet,
    pub amb: AmbiguitySet,
    pub ops: OpsConfig,
    pub sub: SubproblemConfig,
    pub opts: SolveOptions,
}

impl<'a> PlanningProblem<'a> {
    pub fn new(inst: &'a NetworkInstance, ops: OpsConfig, opts: SolveOptions) -> Result<Self> {
        ops.validate()?;
        Ok(PlanningProblem {
            inst,
            boxset: BoxSet::from_instance(inst),
            amb: AmbiguitySet::from_instance(inst)?,
            ops,
            sub: SubproblemConfig::default(),
            opts,
        })
    }
}

/// Annualized investment and salt spray minus the fixed station subsidy.
pub fn first_stage_cost(plan: &PlanningDecision, inst: &NetworkInstance) -> Result<f64> {
    let inv = investment_cost(plan, inst)?;
    let subsidy: f64 = inst
        .pses
        .iter()
        .zip(&plan.y)
        .filter(|(_, &b)| b)
        .map(|(c, _)| c.fixed_subsidy_1e4_cny_per_yr)
        .sum();
    Ok(inv.total() - subsidy)
}

/// Lowest value the surrogate recourse can take for any plan.
fn recourse_floor(inst: &NetworkInstance, segments: usize) -> f64 {
    let all = PlanningDecision {
        z: vec![true; inst.num_lines()],
        ..PlanningDecision::empty(inst)
    };
    -surrogate_gap_bound(&all, segments, inst)
}

#[derive(Debug, Clone)]
pub struct MasterResult {
    pub plan: PlanningDecision,
    /// First-stage cost of `plan`.
    pub first_stage: f64,
    pub eta: f64,
    pub lb: f64,
    pub ub: f64,
    pub nodes: u64,
    pub status: SolveStatus,
}

/// Builds the master program. Returns it with the `z`, `y` and `η` columns.
pub fn build_master(
    problem: &PlanningProblem,
    scenarios: &[RetainedScenario],
    lb_bar: Option<f64>,
) -> Result<(MixedIntegerProgram, Vec<VarId>, Vec<VarId>, VarId)> {
    let inst = problem.inst;
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let rad = build_radiality_constraints(inst, &mut mip);
    let y: Vec<VarId> = (0..inst.pses.len()).map(|k| mip.add_binary(format!("y[{k}]"))).collect();
    for (a, area) in inst.areas.iter().enumerate() {
        let members: Vec<(VarId, f64)> = inst
            .pses
            .iter()
            .enumerate()
            .filter(|(_, c)| area.nodes.contains(&c.node))
            .map(|(k, _)| (y[k], 1.0))
            .collect();
        if members.is_empty() {
            continue;
        }
        mip.add_row(format!("amin[{a}]"), members.clone(), Relation::Ge, area.pses_min as f64);
        mip.add_row(format!("amax[{a}]"), members, Relation::Le, area.pses_max as f64);
    }
    let (cz, cy) = investment_coefficients(inst)?;
    let mut first = LinExpr::new();
    for (l, &v) in rad.z.iter().enumerate() {
        first.add(v, cz[l]);
    }
    for (k, &v) in y.iter().enumerate() {
        first.add(v, cy[k] - inst.pses[k].fixed_subsidy_1e4_cny_per_yr);
    }
    let floor = if scenarios.is_empty() { 0.0 } else { recourse_floor(inst, problem.ops.loss_segments) };
    let eta = mip.add_var("eta", floor, f64::INFINITY);
    mip.add_objective(&first, 1.0);
    mip.add_cost(eta, 1.0);

    let ops = OpsConfig { relaxed_ess: true, ..problem.ops };
    let plan = PlanInput::Vars { z: &rad.z, y: &y };
    for (r, sc) in scenarios.iter().enumerate() {
        let data = NodalData::realize(inst, &problem.boxset, &sc.delta)?;
        let mut expected = LinExpr::new();
        for s in 0..inst.num_scenarios() {
            let ev = &inst.uncertainty.ev_scenarios_mw[s];
            let block = build_operation(inst, &mut mip, plan, &data, ev, &ops, &format!("_r{r}s{s}"));
            expected.add_expr(&block.cost, sc.pi[s]);
        }
        mip.add_constraint(format!("recourse[{r}]"), &LinExpr::term(eta, 1.0), Relation::Ge, &expected);
    }
    if let Some(lb) = lb_bar {
        let mut total = first.clone();
        total.add(eta, 1.0);
        mip.add_constraint("lbcut", &total, Relation::Ge, &LinExpr::constant(lb));
    }
    Ok((mip, rad.z, y, eta))
}

/// Solves the master to relative gap `gap`.
pub fn solve_master(
    problem: &PlanningProblem,
    scenarios: &[RetainedScenario],
    lb_bar: Option<f64>,
    gap: f64,
) -> Result<MasterResult> {
    let (mip, z, y, eta) = build_master(problem, scenarios, lb_bar)?;
    let sol = solve_mip(&mip, gap, &problem.opts)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(Error::Infeasible("no plan satisfies the retained scenarios".into()));
    }
    let sol = sol.require("solving the master problem")?;
    let zb: Vec<bool> = z.iter().map(|&v| sol.value(v) > 0.5).collect();
    let yb: Vec<bool> = y.iter().map(|&v| sol.value(v) > 0.5).collect();
    let plan = PlanningDecision::from_build(problem.inst, zb, yb)?;
    let first_stage = first_stage_cost(&plan, problem.inst)?;
    Ok(MasterResult {
        plan,
        first_stage,
        eta: sol.value(eta),
        lb: sol.bound.min(sol.objective),
        ub: sol.objective,
        nodes: sol.nodes,
        status: sol.status,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IccgOutcome {
    pub plan: PlanningDecision,
    /// First-stage cost plus worst-case recourse of `plan`.
    pub objective: f64,
    pub first_stage: f64,
    pub lower_bound: f64,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub scenarios: Vec<RetainedScenario>,
    /// Worst case of `plan`.
    pub worst_case: SubproblemResult,
    pub backtracks: usize,
    pub master_nodes: u64,
    pub wall_ms: f64,
}

impl IccgOutcome {
    pub fn relative_gap(&self) -> f64 {
        rel(self.objective, self.lower_bound)
    }

    /// `Err(IterationCapExceeded)` when the loop stopped early.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::IterationCapExceeded(self.trace.len()))
        }
    }
}

fn rel(ub: f64, lb: f64) -> f64 {
    if !ub.is_finite() {
        return f64::INFINITY;
    }
    (ub - lb) / ub.abs().max(1e-9)
}

/// Inexact loop with exploitation.
pub fn iccg_solve(problem: &PlanningProblem, params: &IccgParams) -> Result<IccgOutcome> {
    params.validate()?;
    run(problem, params, true)
}

/// Exact masters, exploration only, no bound cut.
pub fn ccg_solve(problem: &PlanningProblem, params: &IccgParams) -> Result<IccgOutcome> {
    params.validate()?;
    let exact = IccgParams { master_gap0: 0.0, ..params.clone() };
    run(problem, &exact, false)
}

fn run(problem: &PlanningProblem, params: &IccgParams, exploit: bool) -> Result<IccgOutcome> {
    let start = Instant::now();
    let tol = 1e-9;
    let mut scenarios: Vec<RetainedScenario> = Vec::new();
    let mut trace = Vec::new();
    let mut gap = if params.master_gap0 < params.gap_floor { 0.0 } else { params.master_gap0 };
    let mut lb_bar: Option<f64> = None;
    let mut lb_certified = true;
    let mut lb_valid = f64::NEG_INFINITY;
    let mut last_valid: Option<usize> = None;
    let mut ub_bar = f64::INFINITY;
    let mut best: Option<(PlanningDecision, f64, SubproblemResult)> = None;
    let mut backtracks = 0;
    let mut master_nodes = 0;
    let mut converged = false;

    for iter in 0..params.max_iterations {
        if rel(ub_bar, lb_valid) < params.epsilon {
            converged = true;
            break;
        }
        let t0 = Instant::now();
        let master = solve_master(problem, &scenarios, lb_bar, gap)?;
        master_nodes += master.nodes;
        let cut = lb_bar.unwrap_or(f64::NEG_INFINITY);
        let slack = tol * cut.abs().max(1.0);
        let valid = lb_certified || master.lb > cut + slack;
        if valid {
            last_valid = Some(iter);
            lb_valid = lb_valid.max(master.lb);
        }
        let exact_here = master.ub - master.lb <= tol * master.ub.abs().max(1.0);
        if exploit {
            lb_bar = Some(master.ub);
        }
        lb_certified = valid && exact_here;

        let sub = solve_subproblem(
            problem.inst,
            &master.plan,
            &problem.boxset,
            &problem.amb,
            &problem.ops,
            &problem.sub,
            &problem.opts,
        )?;
        let candidate = master.first_stage + sub.value;
        if sub.feasible && candidate < ub_bar {
            ub_bar = candidate;
            best = Some((master.plan.clone(), master.first_stage, sub.clone()));
        }

        let trigger = ub_bar.is_finite() && (ub_bar - master.ub) / ub_bar.abs().max(1e-9) < params.epsilon_tilde;
        // an exact master with a certified cut leaves nothing to tighten
        let phase = if exploit && trigger && !(gap == 0.0 && lb_certified) {
            Phase::Exploitation
        } else {
            Phase::Exploration
        };
        trace.push(IterationRecord {
            iter,
            phase,
            lb: master.lb,
            ub: master.ub,
            ub_bar,
            lb_bar: cut,
            master_gap: gap,
            subproblem_value: sub.value,
            valid,
            lb_valid,
            last_valid,
            scenarios: scenarios.len(),
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
            nodes: master.nodes,
            subproblem_nodes: sub.nodes,
        });
        match phase {
            Phase::Exploitation => {
                backtracks += 1;
                lb_bar = last_valid.map(|_| lb_valid);
                lb_certified = true;
                gap *= params.alpha;
                if gap < params.gap_floor {
                    gap = 0.0;
                }
            }
            Phase::Exploration => {
                let retained = RetainedScenario { delta: sub.delta, pi: sub.pi };
                if !scenarios.contains(&retained) {
                    if scenarios.len() == params.max_scenarios {
                        break;
                    }
                    scenarios.push(retained);
                }
            }
        }
    }
    if !converged && rel(ub_bar, lb_valid) < params.epsilon {
        converged = true;
    }
    let Some((plan, first_stage, worst_case)) = best else {
        return Err(Error::IterationCapExceeded(trace.len()));
    };
    Ok(IccgOutcome {
        plan,
        objective: ub_bar,
        first_stage,
        lower_bound: lb_valid,
        converged,
        trace,
        scenarios,
        worst_case,
        backtracks,
        master_nodes,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Radial topologies combined with every station pattern allowed by the
/// area limits, in lexicographic order.
pub fn enumerate_plans(inst: &NetworkInstance, limit: usize) -> Result<Vec<PlanningDecision>> {
    let k = inst.pses.len();
    if k > 20 {
        return Err(Error::CombinatorialLimitExceeded(format!("{k} station candidates")));
    }
    let mut patterns = Vec::new();
    for bits in 0u32..(1 << k) {
        let y: Vec<bool> = (0..k).map(|j| bits >> j & 1 == 1).collect();
        let ok = inst.areas.iter().all(|a| {
            let n = inst.pses.iter().zip(&y).filter(|(c, &b)| b && a.nodes.contains(&c.node)).count();
            n >= a.pses_min && n <= a.pses_max
        });
        if ok {
            patterns.push(y);
        }
    }
    let mut topo = enumerate_radial_topologies(inst, limit)?;
    topo.sort();
    patterns.sort();
    if topo.len().saturating_mul(patterns.len()) > limit {
        return Err(Error::CombinatorialLimitExceeded(format!(
            "{} topologies × {} station patterns",
            topo.len(),
            patterns.len()
        )));
    }
    let mut out = Vec::with_capacity(topo.len() * patterns.len());
    for z in &topo {
        for y in &patterns {
            out.push(PlanningDecision::from_build(inst, z.clone(), y.clone())?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationResult {
    pub plan: PlanningDecision,
    pub objective: f64,
    pub plans: usize,
    /// Plans whose worst case was evaluated (the rest were pruned on cost).
    pub evaluated: usize,
}

/// Exhaustive search over plans, each evaluated by vertex enumeration.
/// Ties go to the lexicographically smallest `(z, y)`.
pub fn oracle_plan_enumeration(problem: &PlanningProblem, limit: usize) -> Result<EnumerationResult> {
    let plans = enumerate_plans(problem.inst, limit)?;
    let mut best: Option<(PlanningDecision, f64)> = None;
    let mut evaluated = 0;
    for plan in &plans {
        let f = first_stage_cost(plan, problem.inst)?;
        if let Some((_, b)) = &best {
            // recourse is bounded below, so cheap pruning is safe
            if f + recourse_floor(problem.inst, problem.ops.loss_segments) >= *b {
                continue;
            }
        }
        let w = oracle_subproblem_bruteforce(
            problem.inst,
            plan,
            &problem.boxset,
            &problem.amb,
            &problem.ops,
            &problem.opts,
        )?;
        evaluated += 1;
        if !w.feasible {
            continue;
        }
        let total = f + w.value;
        let better = best.as_ref().map_or(true, |(_, b)| total < *b - 1e-9 * b.abs().max(1.0));
        if better {
            best = Some((plan.clone(), total));
        }
    }
    let (plan, objective) = best.ok_or_else(|| Error::Infeasible("no plan is robust feasible".into()))?;
    Ok(EnumerationResult {
        plan,
        objective,
        plans: plans.len(),
        evaluated,
    })
}
