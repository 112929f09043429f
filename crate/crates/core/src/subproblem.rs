//! Worst-case evaluation of a fixed plan: the adversary picks a vertex of
//! the box and a probability vector from the ambiguity set to maximize the
//! expected minimum operating cost.
//!
//! The inner minimization of each scenario is replaced by its LP dual with
//! multipliers scaled by that scenario's probability, so the probability
//! enters linearly. Vertex selection uses one binary per box dimension and
//! the products of binaries with multipliers are linearized exactly.
//! Multipliers are bounded by a cap which is raised whenever a multiplier
//! of a box-linked row touches it or the solution disagrees with a direct
//! primal evaluation. Other multipliers may sit on the cap along flat
//! directions of a degenerate dual face without affecting the value.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{NetworkInstance, PlanningDecision};
use crate::milp::{
    solve_lp, solve_mip, LinExpr, MixedIntegerProgram, Relation, Sense, SolveOptions, SolveStatus, VarId,
};
use crate::operations::{build_fixed_plan_lp, rhs_links, solve_operation, OpsConfig, RhsLink};
use crate::uncertainty::{add_ambiguity_block, worst_case_greedy, AmbiguitySet, BoxSet, NodalData};

#[derive(Debug, Clone, Serialize)]
pub struct SubproblemConfig {
    /// Initial bound on every scaled multiplier.
    pub dual_cap: f64,
    /// Times the cap may be multiplied by ten.
    pub max_cap_raises: usize,
    /// Relative agreement required between the MILP value and the primal
    /// evaluation at its vertex.
    pub tolerance: f64,
}

impl Default for SubproblemConfig {
    fn default() -> Self {
        SubproblemConfig {
            dual_cap: 1e4,
            max_cap_raises: 4,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubproblemResult {
    /// Worst-case expected surrogate cost, evaluated in the primal at `delta`.
    pub value: f64,
    /// Objective of the dualized program.
    pub milp_value: f64,
    pub delta: Vec<f64>,
    /// Box vertex as one bit per dimension (`true` = upper end).
    pub vertex: Vec<bool>,
    pub pi: Vec<f64>,
    /// Per-scenario minimum cost at `delta`; `None` when operation is infeasible.
    pub scenario_costs: Vec<Option<f64>>,
    pub feasible: bool,
    pub dual_cap: f64,
    pub nodes: u64,
    pub wall_ms: f64,
}

/// Multipliers of one minimization LP, written into a host program.
#[derive(Debug, Clone)]
pub struct DualBlock {
    pub rows: Vec<Option<VarId>>,
    pub lower: Vec<Option<VarId>>,
    pub upper: Vec<Option<VarId>>,
    /// `b'μ + l'α + u'β + c0·scale` over the host variables.
    pub objective: LinExpr,
    /// Sign range of each row multiplier before capping.
    pub row_range: Vec<(f64, f64)>,
}

fn cap_range(lo: f64, hi: f64, cap: f64) -> (f64, f64) {
    (lo.max(-cap), hi.min(cap))
}

/// Appends the dual of `lp` (a minimization LP) to `host`, with every
/// multiplier scaled by `scale` so the dual constraints read
/// `A'μ + α + β = scale·c`. Multipliers are bounded by `cap`.
pub fn append_scaled_dual(
    host: &mut MixedIntegerProgram,
    lp: &MixedIntegerProgram,
    scale: &LinExpr,
    cap: f64,
    tag: &str,
) -> Result<DualBlock> {
    if lp.sense != Sense::Minimize || !lp.is_lp() || !lp.quadratic.is_empty() {
        return Err(Error::MalformedProgram("only linear minimization programs can be dualized".into()));
    }
    let n = lp.num_vars();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, row) in lp.rows.iter().enumerate() {
        for &(v, a) in &row.coeffs {
            columns[v.0].push((r, a));
        }
    }
    let mut objective = LinExpr::new();
    let mut block = DualBlock {
        rows: Vec::with_capacity(lp.num_rows()),
        lower: vec![None; n],
        upper: vec![None; n],
        objective: LinExpr::new(),
        row_range: Vec::with_capacity(lp.num_rows()),
    };
    for (r, row) in lp.rows.iter().enumerate() {
        let (lo, hi) = match row.relation {
            Relation::Eq => (f64::NEG_INFINITY, f64::INFINITY),
            Relation::Le => (f64::NEG_INFINITY, 0.0),
            Relation::Ge => (0.0, f64::INFINITY),
        };
        block.row_range.push((lo, hi));
        if row.coeffs.is_empty() {
            block.rows.push(None);
            continue;
        }
        let (lo, hi) = cap_range(lo, hi, cap);
        let mu = host.add_var(format!("mu{tag}[{r}]"), lo, hi);
        if row.rhs != 0.0 {
            objective.add(mu, row.rhs);
        }
        block.rows.push(Some(mu));
    }
    for (j, var) in lp.vars.iter().enumerate() {
        let fixed_zero = var.lower == 0.0 && var.upper == 0.0;
        if fixed_zero {
            // a free multiplier with zero objective absorbs the whole column
            continue;
        }
        let mut e = LinExpr::new();
        for &(r, a) in &columns[j] {
            if let Some(mu) = block.rows[r] {
                e.add(mu, a);
            }
        }
        if var.lower == var.upper {
            let g = host.add_var(format!("fix{tag}[{j}]"), -cap, cap);
            objective.add(g, var.lower);
            e.add(g, 1.0);
            block.lower[j] = Some(g);
        } else {
            if var.lower.is_finite() {
                let a = host.add_var(format!("lo{tag}[{j}]"), 0.0, cap);
                if var.lower != 0.0 {
                    objective.add(a, var.lower);
                }
                e.add(a, 1.0);
                block.lower[j] = Some(a);
            }
            if var.upper.is_finite() {
                let b = host.add_var(format!("up{tag}[{j}]"), -cap, 0.0);
                if var.upper != 0.0 {
                    objective.add(b, var.upper);
                }
                e.add(b, 1.0);
                block.upper[j] = Some(b);
            }
        }
        e.add_expr(scale, -var.cost);
        host.add_constraint(format!("dfeas{tag}[{j}]"), &e, Relation::Eq, &LinExpr::new());
    }
    objective.add_expr(scale, lp.objective_offset);
    block.objective = objective;
    Ok(block)
}

/// Largest `|multiplier| / cap` over the given multipliers.
fn cap_usage(linked: &[VarId], x: &[f64], cap: f64) -> f64 {
    linked.iter().map(|v| x[v.0].abs() / cap).fold(0.0, f64::max)
}

/// Scenario LPs of `plan` at the nominal data plus the box links.
fn scenario_programs(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    cfg: &OpsConfig,
) -> Result<Vec<(MixedIntegerProgram, Vec<RhsLink>)>> {
    let cfg = OpsConfig { relaxed_ess: true, ..*cfg };
    let nominal = NodalData::realize(inst, boxset, &boxset.nominal())?;
    Ok((0..inst.num_scenarios())
        .map(|s| {
            let (lp, block) = build_fixed_plan_lp(inst, plan, &nominal, &inst.uncertainty.ev_scenarios_mw[s], &cfg);
            let links = rhs_links(inst, plan, &block, boxset);
            (lp, links)
        })
        .collect())
}

/// Minimum cost of every scenario at one deviation.
pub fn scenario_costs_at(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    delta: &[f64],
    cfg: &OpsConfig,
    opts: &SolveOptions,
) -> Result<Vec<Option<f64>>> {
    let cfg = OpsConfig { relaxed_ess: true, ..*cfg };
    let data = NodalData::realize(inst, boxset, delta)?;
    (0..inst.num_scenarios())
        .map(|s| {
            Ok(solve_operation(inst, plan, &data, &inst.uncertainty.ev_scenarios_mw[s], &cfg, opts)?.map(|o| o.cost))
        })
        .collect()
}

fn vertex_delta(boxset: &BoxSet, vertex: &[bool]) -> Vec<f64> {
    boxset
        .dims
        .iter()
        .zip(vertex)
        .map(|(d, &up)| if up { d.up } else { -d.down })
        .collect()
}

/// Worst case over probabilities for known scenario costs; infeasible
/// scenarios make the whole evaluation infinite.
fn evaluate(costs: &[Option<f64>], amb: &AmbiguitySet) -> Result<(Vec<f64>, f64)> {
    if costs.iter().any(Option::is_none) {
        return Ok((amb.pi0.clone(), f64::INFINITY));
    }
    let c: Vec<f64> = costs.iter().map(|c| c.unwrap()).collect();
    worst_case_greedy(&c, amb)
}

/// Dualized worst-case program for one plan.
pub struct SubproblemProgram {
    pub mip: MixedIntegerProgram,
    /// Vertex indicator per box dimension.
    pub u: Vec<VarId>,
    pub pi: Vec<VarId>,
    /// Scaled multipliers of the rows that carry a box deviation.
    pub linked: Vec<VarId>,
}

/// Builds the program `solve_subproblem` solves first, at multiplier cap `cap`.
pub fn build_subproblem(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    amb: &AmbiguitySet,
    cfg: &OpsConfig,
    cap: f64,
) -> Result<SubproblemProgram> {
    cfg.validate()?;
    assemble(&scenario_programs(inst, plan, boxset, cfg)?, boxset, amb, cap)
}

fn assemble(programs: &[(MixedIntegerProgram, Vec<RhsLink>)], boxset: &BoxSet, amb: &AmbiguitySet, cap: f64) -> Result<SubproblemProgram> {
    let mut host = MixedIntegerProgram::new(Sense::Maximize);
    let ambv = add_ambiguity_block(&mut host, amb, false);
    let u: Vec<VarId> = (0..boxset.len()).map(|k| host.add_binary(format!("u[{k}]"))).collect();
    let mut linked = Vec::new();
    for (s, (lp, links)) in programs.iter().enumerate() {
        let tag = format!("_{s}");
        let block = append_scaled_dual(&mut host, lp, &LinExpr::term(ambv.pi[s], 1.0), cap, &tag)?;
        host.add_objective(&block.objective, 1.0);
        for link in links {
            let Some(mu) = block.rows[link.row.0] else { continue };
            linked.push(mu);
            let d = &boxset.dims[link.dim];
            if d.width() == 0.0 {
                host.add_cost(mu, -link.coef * d.down);
                continue;
            }
            // δ·μ = −down·μ + width·(u·μ)
            host.add_cost(mu, -link.coef * d.down);
            let (lo, hi) = cap_range(block.row_range[link.row.0].0, block.row_range[link.row.0].1, cap);
            let w = host.add_var(format!("uw{tag}[{}]", link.row.0), lo.min(0.0), hi.max(0.0));
            let uk = u[link.dim];
            host.add_row(format!("mc1{tag}[{}]", link.row.0), vec![(w, 1.0), (uk, -hi)], Relation::Le, 0.0);
            host.add_row(format!("mc2{tag}[{}]", link.row.0), vec![(w, 1.0), (uk, -lo)], Relation::Ge, 0.0);
            host.add_row(
                format!("mc3{tag}[{}]", link.row.0),
                vec![(w, 1.0), (mu, -1.0), (uk, -lo)],
                Relation::Le,
                -lo,
            );
            host.add_row(
                format!("mc4{tag}[{}]", link.row.0),
                vec![(w, 1.0), (mu, -1.0), (uk, -hi)],
                Relation::Ge,
                -hi,
            );
            host.add_cost(w, link.coef * d.width());
        }
    }
    Ok(SubproblemProgram { mip: host, u, pi: ambv.pi, linked })
}

/// Worst-case expected surrogate cost of `plan` over the box vertices and
/// the ambiguity set.
pub fn solve_subproblem(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    amb: &AmbiguitySet,
    cfg: &OpsConfig,
    sub: &SubproblemConfig,
    opts: &SolveOptions,
) -> Result<SubproblemResult> {
    let start = Instant::now();
    cfg.validate()?;
    let nominal = boxset.nominal();
    let nominal_costs = scenario_costs_at(inst, plan, boxset, &nominal, cfg, opts)?;
    if nominal_costs.iter().any(Option::is_none) {
        return Ok(SubproblemResult {
            value: f64::INFINITY,
            milp_value: f64::INFINITY,
            vertex: vec![false; boxset.len()],
            delta: nominal,
            pi: amb.pi0.clone(),
            scenario_costs: nominal_costs,
            feasible: false,
            dual_cap: sub.dual_cap,
            nodes: 0,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let programs = scenario_programs(inst, plan, boxset, cfg)?;
    let mut cap = sub.dual_cap;
    let mut raises = 0;
    loop {
        let SubproblemProgram { mip: host, u, pi: ambpi, linked } = assemble(&programs, boxset, amb, cap)?;
        let sol = if host.is_lp() { solve_lp(&host, opts)? } else { solve_mip(&host, opts.rel_gap.max(1e-7), opts)? };
        if !sol.status.has_solution() {
            return Err(Error::solver(sol.status, "solving the worst-case subproblem"));
        }
        let vertex: Vec<bool> = u.iter().map(|&v| sol.value(v) > 0.5).collect();
        let delta = vertex_delta(boxset, &vertex);
        let costs = scenario_costs_at(inst, plan, boxset, &delta, cfg, opts)?;
        let (pi_eval, value) = evaluate(&costs, amb)?;
        let usage = cap_usage(&linked, &sol.x, cap);
        let agree = value.is_finite() && (value - sol.objective).abs() <= sub.tolerance * value.abs().max(1.0);
        let done = (!value.is_finite() || (agree && usage < 0.99)) || raises >= sub.max_cap_raises;
        if done {
            let feasible = value.is_finite();
            let pi = if feasible { pi_eval } else { ambpi.iter().map(|&v| sol.value(v)).collect() };
            return Ok(SubproblemResult {
                value,
                milp_value: sol.objective,
                delta,
                vertex,
                pi,
                scenario_costs: costs,
                feasible,
                dual_cap: cap,
                nodes: sol.nodes,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        cap *= 10.0;
        raises += 1;
    }
}

/// Enumerates every box vertex; each is evaluated with the primal
/// scenario LPs and the worst-case probability vector.
pub fn oracle_subproblem_bruteforce(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    amb: &AmbiguitySet,
    cfg: &OpsConfig,
    opts: &SolveOptions,
) -> Result<SubproblemResult> {
    const MAX_DIMS: usize = 20;
    let start = Instant::now();
    // dimensions without width contribute a single vertex
    let active: Vec<usize> = (0..boxset.len()).filter(|&k| boxset.dims[k].width() > 0.0).collect();
    if active.len() > MAX_DIMS {
        return Err(Error::CombinatorialLimitExceeded(format!(
            "{} uncertain dimensions (limit {MAX_DIMS})",
            active.len()
        )));
    }
    let mut best: Option<SubproblemResult> = None;
    for bits in 0u64..(1u64 << active.len()) {
        let mut vertex = vec![false; boxset.len()];
        for (i, &k) in active.iter().enumerate() {
            vertex[k] = bits >> i & 1 == 1;
        }
        let delta = vertex_delta(boxset, &vertex);
        let costs = scenario_costs_at(inst, plan, boxset, &delta, cfg, opts)?;
        let (pi, value) = evaluate(&costs, amb)?;
        let better = best.as_ref().map_or(true, |b| value > b.value);
        if better {
            best = Some(SubproblemResult {
                value,
                milp_value: value,
                delta,
                vertex,
                pi,
                feasible: value.is_finite(),
                scenario_costs: costs,
                dual_cap: 0.0,
                nodes: 0,
                wall_ms: 0.0,
            });
            if !value.is_finite() {
                break;
            }
        }
    }
    let mut best = best.expect("at least one vertex");
    best.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(best)
}

/// Bound on the absolute slack `activity − rhs` of a row over the variable
/// box, used as the complementarity big-M.
fn row_slack_bound(lp: &MixedIntegerProgram, r: usize, extra: f64) -> Result<f64> {
    let row = &lp.rows[r];
    let (mut lo, mut hi) = (-row.rhs, -row.rhs);
    for &(v, a) in &row.coeffs {
        let var = &lp.vars[v.0];
        if !var.lower.is_finite() || !var.upper.is_finite() {
            return Err(Error::UnboundedM(var.name.clone()));
        }
        let (p, q) = (a * var.lower, a * var.upper);
        lo += p.min(q);
        hi += p.max(q);
    }
    Ok(lo.abs().max(hi.abs()) + extra)
}

/// Worst case over box vertices for a fixed probability vector, written
/// with primal feasibility, dual feasibility and big-M complementarity.
/// Independent of [`solve_subproblem`]'s dual objective; used as a cross-check.
pub fn solve_subproblem_kkt(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    pi: &[f64],
    cfg: &OpsConfig,
    dual_m: f64,
    opts: &SolveOptions,
) -> Result<SubproblemResult> {
    let start = Instant::now();
    if pi.len() != inst.num_scenarios() {
        return Err(Error::DimensionMismatch(format!("{} probabilities for {} scenarios", pi.len(), inst.num_scenarios())));
    }
    let programs = scenario_programs(inst, plan, boxset, cfg)?;
    let mut host = MixedIntegerProgram::new(Sense::Maximize);
    let u: Vec<VarId> = (0..boxset.len()).map(|k| host.add_binary(format!("u[{k}]"))).collect();
    for (s, (lp, links)) in programs.iter().enumerate() {
        let tag = format!("_{s}");
        // primal copy
        let x: Vec<VarId> = lp
            .vars
            .iter()
            .map(|v| host.add_var(format!("{}{tag}", v.name), v.lower, v.upper))
            .collect();
        for (j, v) in lp.vars.iter().enumerate() {
            host.add_cost(x[j], pi[s] * v.cost);
        }
        host.objective_offset += pi[s] * lp.objective_offset;
        let mut shift: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_rows()];
        for link in links {
            shift[link.row.0].push((link.dim, link.coef));
        }
        // unscaled dual with complementarity
        let dual = append_scaled_dual(&mut host, lp, &LinExpr::constant(1.0), dual_m, &format!("{tag}d"))?;
        for (r, row) in lp.rows.iter().enumerate() {
            let mut coeffs: Vec<(VarId, f64)> = row.coeffs.iter().map(|&(v, a)| (x[v.0], a)).collect();
            let mut rhs = row.rhs;
            let mut swing = 0.0;
            for &(dim, coef) in &shift[r] {
                let d = &boxset.dims[dim];
                rhs -= coef * d.down;
                swing += (coef * d.width()).abs();
                if d.width() > 0.0 {
                    coeffs.push((u[dim], -coef * d.width()));
                }
            }
            host.add_row(format!("p{tag}[{r}]"), coeffs.clone(), row.relation, rhs);
            if row.relation == Relation::Eq {
                continue;
            }
            let Some(mu) = dual.rows[r] else { continue };
            // the multiplier may be nonzero only where the row is tight
            let m = row_slack_bound(lp, r, swing)?;
            let b = host.add_binary(format!("cs{tag}[{r}]"));
            if row.relation == Relation::Le {
                host.add_row(format!("csm{tag}[{r}]"), vec![(mu, 1.0), (b, dual_m)], Relation::Ge, 0.0);
            } else {
                host.add_row(format!("csm{tag}[{r}]"), vec![(mu, 1.0), (b, -dual_m)], Relation::Le, 0.0);
            }
            // sign·(a·x − rhs) ≤ m·(1 − b)
            let sign = if row.relation == Relation::Le { -1.0 } else { 1.0 };
            let mut slack: Vec<(VarId, f64)> = coeffs.iter().map(|&(v, a)| (v, sign * a)).collect();
            slack.push((b, m));
            host.add_row(format!("css{tag}[{r}]"), slack, Relation::Le, sign * rhs + m);
        }
        for (j, v) in lp.vars.iter().enumerate() {
            if v.lower == v.upper {
                continue;
            }
            let width = v.upper - v.lower;
            if let Some(a) = dual.lower[j] {
                let b = host.add_binary(format!("cl{tag}[{j}]"));
                host.add_row(format!("clm{tag}[{j}]"), vec![(a, 1.0), (b, -dual_m)], Relation::Le, 0.0);
                host.add_row(format!("cls{tag}[{j}]"), vec![(x[j], 1.0), (b, width)], Relation::Le, v.lower + width);
            }
            if let Some(bv) = dual.upper[j] {
                let b = host.add_binary(format!("cu{tag}[{j}]"));
                host.add_row(format!("cum{tag}[{j}]"), vec![(bv, 1.0), (b, dual_m)], Relation::Ge, 0.0);
                host.add_row(format!("cus{tag}[{j}]"), vec![(x[j], -1.0), (b, width)], Relation::Le, -v.upper + width);
            }
        }
    }
    let sol = solve_mip(&host, opts.rel_gap.max(1e-7), opts)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(Error::InfeasiblePlan("no vertex admits a feasible operation".into()));
    }
    let sol = sol.require("solving the complementarity subproblem")?;
    let vertex: Vec<bool> = u.iter().map(|&v| sol.value(v) > 0.5).collect();
    let delta = vertex_delta(boxset, &vertex);
    let costs = scenario_costs_at(inst, plan, boxset, &delta, cfg, opts)?;
    let value = costs.iter().zip(pi).map(|(c, p)| c.map_or(f64::INFINITY, |c| c * p)).sum();
    Ok(SubproblemResult {
        value,
        milp_value: sol.objective,
        delta,
        vertex,
        pi: pi.to_vec(),
        feasible: costs.iter().all(Option::is_some),
        scenario_costs: costs,
        dual_cap: dual_m,
        nodes: sol.nodes,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests;
