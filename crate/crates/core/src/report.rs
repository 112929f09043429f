//! Plan evaluation at a fixed realization, the annual cost breakdown and
//! the files written by the command-line front end.
//!
//! Reports hold no wall-clock data so that identical inputs give identical
//! bytes; timings go to the trace file only.

#[cfg(test)]
mod tests;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::carbon::{optimize_procurement, DispatchPlan, IntensityMode};
use crate::error::{Error, Result};
use crate::iccg::{IccgOutcome, IccgParams, IterationRecord};
use crate::instance::{investment_cost, NetworkInstance, PlanningDecision};
use crate::milp::SolveOptions;
use crate::operations::{
    canonicalize_ess, operation_cost_true, solve_operation, surrogate_gap_bound, OperatingPoint, OpsConfig,
};
use crate::uncertainty::{BoxSet, NodalData};

/// Annual costs in 10⁴ CNY.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub line_construction: f64,
    pub pses_investment: f64,
    pub salt_spray: f64,
    /// Expected surrogate loss cost at the evaluated realization.
    pub network_loss: f64,
    pub carbon: f64,
    pub procurement: f64,
    /// Fixed and energy subsidies, as a non-positive amount.
    pub subsidy: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn components(&self) -> f64 {
        self.line_construction + self.pses_investment + self.salt_spray + self.network_loss + self.carbon + self.procurement
    }

    pub fn check(&self) -> Result<()> {
        let parts = [
            self.line_construction,
            self.pses_investment,
            self.salt_spray,
            self.network_loss,
            self.carbon,
            self.procurement,
        ];
        if parts.iter().any(|&c| c < -1e-9) || self.subsidy > 1e-12 {
            return Err(Error::Domain(format!("cost breakdown has a sign violation: {self:?}")));
        }
        if (self.components() + self.subsidy - self.total).abs() > 1e-6 {
            return Err(Error::Domain("cost breakdown does not add up".into()));
        }
        Ok(())
    }
}

/// One scenario operated at the evaluated realization.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEvaluation {
    pub scenario: usize,
    pub probability: f64,
    pub loss_surrogate: f64,
    pub loss_true: f64,
    pub pv_subsidy: f64,
    pub point: OperatingPoint,
    pub dispatch: DispatchPlan,
    /// Nodal carbon intensity per node and interval.
    pub intensity: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanEvaluation {
    pub delta: Vec<f64>,
    pub pi: Vec<f64>,
    pub feasible: bool,
    /// Scenarios that cannot be operated at `delta`.
    pub infeasible_scenarios: Vec<usize>,
    pub scenarios: Vec<ScenarioEvaluation>,
    pub costs: CostBreakdown,
    pub true_loss: f64,
    pub surrogate_gap_bound: f64,
    pub voltage: VoltageStats,
    /// Probability-weighted mean intensity over nodes and intervals.
    pub average_intensity: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VoltageStats {
    pub min: f64,
    pub max: f64,
    pub extreme_difference: f64,
    pub std: f64,
}

/// Pooled statistics of all magnitudes, one weight per scenario.
pub fn voltage_stats(profiles: &[(f64, Vec<Vec<f64>>)]) -> VoltageStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let (mut w_sum, mut mean) = (0.0, 0.0);
    for (w, v) in profiles {
        for &x in v.iter().flatten() {
            min = min.min(x);
            max = max.max(x);
            w_sum += w;
            mean += w * x;
        }
    }
    if w_sum <= 0.0 {
        return VoltageStats::default();
    }
    mean /= w_sum;
    let var = profiles
        .iter()
        .flat_map(|(w, v)| v.iter().flatten().map(move |&x| w * (x - mean) * (x - mean)))
        .sum::<f64>()
        / w_sum;
    VoltageStats {
        min,
        max,
        extreme_difference: max - min,
        std: var.sqrt(),
    }
}

/// Operates `plan` in every scenario at `delta`, then prices procurement
/// and carbon on each operating point and weights by `pi`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_plan(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    boxset: &BoxSet,
    delta: &[f64],
    pi: &[f64],
    ops: &OpsConfig,
    mode: IntensityMode,
    opts: &SolveOptions,
) -> Result<PlanEvaluation> {
    if pi.len() != inst.num_scenarios() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {} scenarios",
            pi.len(),
            inst.num_scenarios()
        )));
    }
    if !boxset.contains(delta) {
        return Err(Error::Domain("realization lies outside the uncertainty box".into()));
    }
    let data = NodalData::realize(inst, boxset, delta)?;
    let eta = inst.horizon.eta_grid_h_per_yr;
    let mut scenarios = Vec::new();
    let mut infeasible = Vec::new();
    for s in 0..inst.num_scenarios() {
        let ev = &inst.uncertainty.ev_scenarios_mw[s];
        let Some(sol) = solve_operation(inst, plan, &data, ev, ops, opts)? else {
            infeasible.push(s);
            continue;
        };
        let point = canonicalize_ess(inst, plan, &data, ev, ops, sol.cost, opts)?;
        let (dispatch, cef) = optimize_procurement(&point, inst, mode)?;
        let pv_subsidy = inst
            .pses
            .iter()
            .zip(&point.pv)
            .map(|(c, pv)| eta * c.pv_subsidy_1e4_cny_per_mwh * pv.iter().sum::<f64>())
            .sum();
        scenarios.push(ScenarioEvaluation {
            scenario: s,
            probability: pi[s],
            loss_surrogate: sol.cost,
            loss_true: operation_cost_true(&point, inst),
            pv_subsidy,
            point,
            dispatch,
            intensity: cef.intensity,
        });
    }
    let expect = |f: &dyn Fn(&ScenarioEvaluation) -> f64| scenarios.iter().map(|e| e.probability * f(e)).sum::<f64>();
    let inv = investment_cost(plan, inst)?;
    let fixed: f64 = inst
        .pses
        .iter()
        .zip(&plan.y)
        .filter(|(_, &b)| b)
        .map(|(c, _)| c.fixed_subsidy_1e4_cny_per_yr)
        .sum();
    let mut costs = CostBreakdown {
        line_construction: inv.lines,
        pses_investment: inv.pses,
        salt_spray: inv.salt,
        network_loss: expect(&|e| e.loss_surrogate),
        carbon: expect(&|e| e.dispatch.carbon_cost),
        procurement: expect(&|e| e.dispatch.procurement_cost),
        subsidy: -(fixed + expect(&|e| e.pv_subsidy)),
        total: 0.0,
    };
    costs.total = costs.components() + costs.subsidy;
    let profiles: Vec<(f64, Vec<Vec<f64>>)> = scenarios.iter().map(|e| (e.probability, e.point.voltages())).collect();
    let cells = (inst.num_nodes() * inst.num_intervals()).max(1) as f64;
    let average_intensity = expect(&|e| e.intensity.iter().flatten().sum::<f64>() / cells);
    Ok(PlanEvaluation {
        delta: delta.to_vec(),
        pi: pi.to_vec(),
        feasible: infeasible.is_empty(),
        infeasible_scenarios: infeasible,
        true_loss: expect(&|e| e.loss_true),
        surrogate_gap_bound: surrogate_gap_bound(plan, ops.loss_segments, inst),
        voltage: voltage_stats(&profiles),
        average_intensity,
        costs,
        scenarios,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: String,
    pub params: IccgParams,
    pub ops: OpsConfig,
    pub intensity_mode: IntensityMode,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverStats {
    pub converged: bool,
    pub iterations: usize,
    pub backtracks: usize,
    pub master_nodes: u64,
    pub retained_scenarios: usize,
    pub objective: f64,
    pub lower_bound: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub instance: String,
    pub plan: PlanningDecision,
    /// Indices of the built lines.
    pub built_lines: Vec<usize>,
    /// Nodes of the built stations.
    pub station_nodes: Vec<usize>,
    pub costs: CostBreakdown,
    pub worst_case_delta: Vec<f64>,
    pub worst_case_pi: Vec<f64>,
    pub worst_case_value: f64,
    pub true_loss: f64,
    pub surrogate_gap_bound: f64,
    pub voltage: VoltageStats,
    pub average_intensity: f64,
    pub stats: SolverStats,
    pub trace_file: String,
    pub config: ConfigEcho,
}

impl PlanReport {
    pub fn new(instance: &str, inst: &NetworkInstance, outcome: &IccgOutcome, eval: &PlanEvaluation, config: ConfigEcho) -> Self {
        let plan = outcome.plan.clone();
        PlanReport {
            instance: instance.to_string(),
            built_lines: (0..plan.z.len()).filter(|&l| plan.z[l]).collect(),
            station_nodes: inst.pses.iter().zip(&plan.y).filter(|(_, &b)| b).map(|(c, _)| c.node).collect(),
            plan,
            costs: eval.costs,
            worst_case_delta: outcome.worst_case.delta.clone(),
            worst_case_pi: outcome.worst_case.pi.clone(),
            worst_case_value: outcome.worst_case.value,
            true_loss: eval.true_loss,
            surrogate_gap_bound: eval.surrogate_gap_bound,
            voltage: eval.voltage,
            average_intensity: eval.average_intensity,
            stats: SolverStats {
                converged: outcome.converged,
                iterations: outcome.trace.len(),
                backtracks: outcome.backtracks,
                master_nodes: outcome.master_nodes,
                retained_scenarios: outcome.scenarios.len(),
                objective: outcome.objective,
                lower_bound: outcome.lower_bound,
                relative_gap: outcome.relative_gap(),
            },
            trace_file: "trace.csv".into(),
            config,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iter",
        "phase",
        "lb",
        "ub",
        "ub_bar",
        "lb_bar",
        "master_gap",
        "subproblem_value",
        "wall_ms",
        "nodes",
    ])?;
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            r.phase.to_string(),
            r.lb.to_string(),
            r.ub.to_string(),
            r.ub_bar.to_string(),
            r.lb_bar.to_string(),
            r.master_gap.to_string(),
            r.subproblem_value.to_string(),
            format!("{:.3}", r.wall_ms),
            r.nodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `iter, lb_valid, ub_bar, gap` per iteration.
pub fn write_convergence_csv<W: Write>(trace: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "lb_valid", "ub_bar", "gap"])?;
    for r in trace {
        let gap = if r.ub_bar.is_finite() { (r.ub_bar - r.lb_valid) / r.ub_bar.abs().max(1e-9) } else { f64::INFINITY };
        w.write_record([r.iter.to_string(), r.lb_valid.to_string(), r.ub_bar.to_string(), gap.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `scenario, node, t, v_pu` for every operated scenario.
pub fn write_voltage_csv<W: Write>(eval: &PlanEvaluation, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "node", "t", "v_pu"])?;
    for e in &eval.scenarios {
        for (i, row) in e.point.voltages().iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                w.write_record([e.scenario.to_string(), i.to_string(), t.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `node, t, intensity` with the probability-weighted intensity.
pub fn write_intensity_csv<W: Write>(eval: &PlanEvaluation, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "t", "intensity_t_per_mwh"])?;
    let Some(first) = eval.scenarios.first() else {
        w.flush()?;
        return Ok(());
    };
    let mass: f64 = eval.scenarios.iter().map(|e| e.probability).sum::<f64>().max(1e-12);
    for i in 0..first.intensity.len() {
        for t in 0..first.intensity[i].len() {
            let v: f64 = eval.scenarios.iter().map(|e| e.probability * e.intensity[i][t]).sum::<f64>() / mass;
            w.write_record([i.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json`, `plan.json`, `trace.csv` and the plot files.
pub fn write_plan_outputs(dir: &Path, report: &PlanReport, outcome: &IccgOutcome, eval: &PlanEvaluation) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    write_json(&dir.join("plan.json"), &outcome.plan)?;
    write_trace_csv(&outcome.trace, fs::File::create(dir.join("trace.csv"))?)?;
    write_convergence_csv(&outcome.trace, fs::File::create(dir.join("convergence.csv"))?)?;
    write_voltage_csv(eval, fs::File::create(dir.join("voltage_profiles.csv"))?)?;
    write_intensity_csv(eval, fs::File::create(dir.join("intensity_heatmap.csv"))?)?;
    Ok(())
}
