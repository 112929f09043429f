//! Uncertainty description: box deviations on demand and PV availability,
//! and the norm-bounded ambiguity set over EV scenario probabilities.

pub mod ev;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::NetworkInstance;
use crate::milp::{
    solve_lp, solve_mip, Backend, LinExpr, MixedIntegerProgram, Relation, Sense, SolveOptions, VarId,
};

/// `θ₁ = |S|/(2|I||T|)·ln(2|S|/(1−α₁))`.
pub fn compute_theta1(scenarios: usize, nodes: usize, intervals: usize, alpha1: f64) -> Result<f64> {
    check_theta_args(scenarios, nodes, intervals, alpha1)?;
    let s = scenarios as f64;
    Ok(s / (2.0 * nodes as f64 * intervals as f64) * (2.0 * s / (1.0 - alpha1)).ln())
}

/// `θ∞ = 1/(2|I||T|)·ln(2|S|/(1−α∞))`.
pub fn compute_theta_inf(scenarios: usize, nodes: usize, intervals: usize, alpha_inf: f64) -> Result<f64> {
    check_theta_args(scenarios, nodes, intervals, alpha_inf)?;
    let s = scenarios as f64;
    Ok(1.0 / (2.0 * nodes as f64 * intervals as f64) * (2.0 * s / (1.0 - alpha_inf)).ln())
}

fn check_theta_args(s: usize, i: usize, t: usize, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("confidence level {alpha} outside (0, 1)")));
    }
    if s == 0 || i == 0 || t == 0 {
        return Err(Error::Domain("scenario, node and interval counts must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DimKind {
    ActiveLoad,
    ReactiveLoad,
    PvAvailability,
}

/// One uncertain scalar: `reference + δ` with `δ ∈ [−down, up]`.
#[derive(Debug, Clone, Serialize)]
pub struct UncertainDim {
    pub kind: DimKind,
    pub node: usize,
    pub t: usize,
    pub reference: f64,
    pub down: f64,
    pub up: f64,
}

impl UncertainDim {
    pub fn width(&self) -> f64 {
        self.down + self.up
    }
}

/// Box set restricted to the dimensions with nonzero width.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoxSet {
    pub dims: Vec<UncertainDim>,
}

impl BoxSet {
    pub fn from_instance(inst: &NetworkInstance) -> Self {
        let u = &inst.uncertainty;
        let mut dims = Vec::new();
        let groups = [
            (DimKind::ActiveLoad, &u.p_dev_mw),
            (DimKind::ReactiveLoad, &u.q_dev_mvar),
            (DimKind::PvAvailability, &u.pv_dev_mw),
        ];
        for (kind, devs) in groups {
            for dev in devs {
                for t in 0..inst.num_intervals() {
                    let (down, up) = (dev.down[t], dev.up[t]);
                    if down + up <= 0.0 {
                        continue;
                    }
                    let reference = match kind {
                        DimKind::ActiveLoad => inst.nodes[dev.node].p_load_mw[t],
                        DimKind::ReactiveLoad => inst.nodes[dev.node].q_load_mvar[t],
                        DimKind::PvAvailability => {
                            let k = inst.pses_at(dev.node).expect("validated PV deviation node");
                            inst.pses[k].pv_max_mw[t]
                        }
                    };
                    dims.push(UncertainDim {
                        kind,
                        node: dev.node,
                        t,
                        reference,
                        down,
                        up,
                    });
                }
            }
        }
        BoxSet { dims }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn num_corners(&self) -> f64 {
        2f64.powi(self.dims.len() as i32)
    }

    pub fn nominal(&self) -> Vec<f64> {
        vec![0.0; self.dims.len()]
    }

    /// Corner with bit `k` of `bits` selecting the upper end of dimension `k`.
    pub fn corner(&self, bits: u64) -> Vec<f64> {
        self.dims
            .iter()
            .enumerate()
            .map(|(k, d)| if bits >> k & 1 == 1 { d.up } else { -d.down })
            .collect()
    }

    pub fn contains(&self, deviation: &[f64]) -> bool {
        deviation.len() == self.dims.len()
            && self
                .dims
                .iter()
                .zip(deviation)
                .all(|(d, &v)| v >= -d.down - 1e-9 && v <= d.up + 1e-9)
    }

    /// Box shrunk or grown by `factor` around the reference.
    pub fn scaled(&self, factor: f64) -> Self {
        BoxSet {
            dims: self
                .dims
                .iter()
                .map(|d| UncertainDim {
                    down: d.down * factor,
                    up: d.up * factor,
                    ..d.clone()
                })
                .collect(),
        }
    }
}

/// Demand and PV availability at one realization of the box.
#[derive(Debug, Clone, Serialize)]
pub struct NodalData {
    pub p_load: Vec<Vec<f64>>,
    pub q_load: Vec<Vec<f64>>,
    /// Per station candidate.
    pub pv_avail: Vec<Vec<f64>>,
}

impl NodalData {
    pub fn realize(inst: &NetworkInstance, boxset: &BoxSet, deviation: &[f64]) -> Result<Self> {
        if deviation.len() != boxset.len() {
            return Err(Error::DimensionMismatch(format!(
                "deviation has {} entries, box has {}",
                deviation.len(),
                boxset.len()
            )));
        }
        let mut data = NodalData {
            p_load: inst.nodes.iter().map(|n| n.p_load_mw.clone()).collect(),
            q_load: inst.nodes.iter().map(|n| n.q_load_mvar.clone()).collect(),
            pv_avail: inst.pses.iter().map(|c| c.pv_max_mw.clone()).collect(),
        };
        for (d, &v) in boxset.dims.iter().zip(deviation) {
            match d.kind {
                DimKind::ActiveLoad => data.p_load[d.node][d.t] += v,
                DimKind::ReactiveLoad => data.q_load[d.node][d.t] += v,
                DimKind::PvAvailability => {
                    let k = inst.pses_at(d.node).expect("validated PV deviation node");
                    data.pv_avail[k][d.t] = (data.pv_avail[k][d.t] + v).max(0.0);
                }
            }
        }
        Ok(data)
    }
}

/// Norm-bounded set of scenario probability vectors around `pi0`.
#[derive(Debug, Clone, Serialize)]
pub struct AmbiguitySet {
    pub pi0: Vec<f64>,
    pub theta1: f64,
    pub theta_inf: f64,
    pub alpha1: f64,
    pub alpha_inf: f64,
}

impl AmbiguitySet {
    pub fn from_instance(inst: &NetworkInstance) -> Result<Self> {
        let u = &inst.uncertainty;
        let (s, i, t) = (u.pi0.len(), inst.num_nodes(), inst.num_intervals());
        Ok(AmbiguitySet {
            pi0: u.pi0.clone(),
            theta1: compute_theta1(s, i, t, u.alpha1)?,
            theta_inf: compute_theta_inf(s, i, t, u.alpha_inf)?,
            alpha1: u.alpha1,
            alpha_inf: u.alpha_inf,
        })
    }

    /// Set with explicit budgets.
    pub fn with_budgets(pi0: Vec<f64>, theta1: f64, theta_inf: f64) -> Self {
        AmbiguitySet {
            pi0,
            theta1,
            theta_inf,
            alpha1: f64::NAN,
            alpha_inf: f64::NAN,
        }
    }

    pub fn num_scenarios(&self) -> usize {
        self.pi0.len()
    }

    pub fn contains(&self, pi: &[f64], tol: f64) -> bool {
        if pi.len() != self.pi0.len() || pi.iter().any(|&p| p < -tol) {
            return false;
        }
        let sum: f64 = pi.iter().sum();
        let l1: f64 = pi.iter().zip(&self.pi0).map(|(a, b)| (a - b).abs()).sum();
        let linf = pi
            .iter()
            .zip(&self.pi0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (sum - 1.0).abs() <= tol && l1 <= self.theta1 + tol && linf <= self.theta_inf + tol
    }
}

/// Variables of an ambiguity block inside a larger program.
#[derive(Debug, Clone)]
pub struct AmbiguityVars {
    pub pi: Vec<VarId>,
    pub plus: Vec<VarId>,
    pub minus: Vec<VarId>,
}

/// Adds the probability simplex, deviation split and both norm budgets.
/// With `binary = true` the sign indicators of the deviations are declared
/// as binaries, otherwise the block is a pure LP.
pub fn add_ambiguity_block(mip: &mut MixedIntegerProgram, amb: &AmbiguitySet, binary: bool) -> AmbiguityVars {
    let n = amb.num_scenarios();
    let mut vars = AmbiguityVars {
        pi: Vec::with_capacity(n),
        plus: Vec::with_capacity(n),
        minus: Vec::with_capacity(n),
    };
    let (t1, ti) = (amb.theta1, amb.theta_inf);
    for s in 0..n {
        let pi = mip.add_var(format!("pi[{s}]"), 0.0, 1.0);
        let plus = mip.add_var(format!("pi+[{s}]"), 0.0, t1.min(ti));
        let minus = mip.add_var(format!("pi-[{s}]"), 0.0, t1.min(ti));
        mip.add_row(
            format!("pidev[{s}]"),
            vec![(pi, 1.0), (plus, -1.0), (minus, 1.0)],
            Relation::Eq,
            amb.pi0[s],
        );
        mip.add_row(
            format!("piinf[{s}]"),
            vec![(plus, 1.0), (minus, 1.0)],
            Relation::Le,
            ti,
        );
        if binary {
            let b1p = mip.add_binary(format!("pi1+[{s}]"));
            let b1m = mip.add_binary(format!("pi1-[{s}]"));
            let b2p = mip.add_binary(format!("pi2+[{s}]"));
            let b2m = mip.add_binary(format!("pi2-[{s}]"));
            mip.add_row(format!("pi1x[{s}]"), vec![(b1p, 1.0), (b1m, 1.0)], Relation::Le, 1.0);
            mip.add_row(format!("pi2x[{s}]"), vec![(b2p, 1.0), (b2m, 1.0)], Relation::Le, 1.0);
            mip.add_row(format!("pi1+cap[{s}]"), vec![(plus, 1.0), (b1p, -t1)], Relation::Le, 0.0);
            mip.add_row(format!("pi1-cap[{s}]"), vec![(minus, 1.0), (b1m, -t1)], Relation::Le, 0.0);
            mip.add_row(format!("pi2+cap[{s}]"), vec![(plus, 1.0), (b2p, -ti)], Relation::Le, 0.0);
            mip.add_row(format!("pi2-cap[{s}]"), vec![(minus, 1.0), (b2m, -ti)], Relation::Le, 0.0);
        }
        vars.pi.push(pi);
        vars.plus.push(plus);
        vars.minus.push(minus);
    }
    mip.add_row("pisum", vars.pi.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    let mut l1 = LinExpr::new();
    for s in 0..n {
        l1.add(vars.plus[s], 1.0);
        l1.add(vars.minus[s], 1.0);
    }
    mip.add_row("pil1", l1.compact(), Relation::Le, t1);
    vars
}

fn check_costs(costs: &[f64], amb: &AmbiguitySet) -> Result<()> {
    if costs.len() != amb.num_scenarios() {
        return Err(Error::DimensionMismatch(format!(
            "{} costs for {} scenarios",
            costs.len(),
            amb.num_scenarios()
        )));
    }
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("scenario costs must be finite".into()));
    }
    Ok(())
}

fn worst_case_program(costs: &[f64], amb: &AmbiguitySet, binary: bool) -> Result<(Vec<f64>, f64)> {
    check_costs(costs, amb)?;
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);
    let vars = add_ambiguity_block(&mut mip, amb, binary);
    for (s, &c) in costs.iter().enumerate() {
        mip.set_cost(vars.pi[s], c);
    }
    let opts = SolveOptions::with_backend(Backend::Native);
    let sol = if binary {
        solve_mip(&mip, 0.0, &opts)?
    } else {
        solve_lp(&mip, &opts)?
    }
    .require("maximizing over the ambiguity set")?;
    let pi: Vec<f64> = vars.pi.iter().map(|&v| sol.value(v)).collect();
    Ok((pi, sol.objective))
}

/// Worst-case expectation of `costs` over the ambiguity set, using the
/// formulation with binary sign indicators.
pub fn worst_case_probabilities(costs: &[f64], amb: &AmbiguitySet) -> Result<(Vec<f64>, f64)> {
    worst_case_program(costs, amb, true)
}

/// Same maximization with the sign indicators dropped (a pure LP).
pub fn worst_case_probabilities_lp(costs: &[f64], amb: &AmbiguitySet) -> Result<(Vec<f64>, f64)> {
    worst_case_program(costs, amb, false)
}

/// Closed-form worst case: move probability mass from the cheapest
/// scenarios to the costliest ones, at most `θ∞` into or out of any single
/// scenario and at most `θ₁/2` in total.
pub fn worst_case_greedy(costs: &[f64], amb: &AmbiguitySet) -> Result<(Vec<f64>, f64)> {
    check_costs(costs, amb)?;
    let n = costs.len();
    let mut order: Vec<usize> = (0..n).collect();
    // descending cost, lowest index first on ties
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    let mut pi = amb.pi0.clone();
    let mut give_cap: Vec<f64> = amb.pi0.iter().map(|&p| p.min(amb.theta_inf)).collect();
    let mut take_cap = vec![amb.theta_inf; n];
    let mut budget = (amb.theta1 / 2.0).max(0.0);
    let (mut i, mut j) = (0usize, n.saturating_sub(1));
    while n > 1 && i < j && budget > 0.0 {
        let (hi, lo) = (order[i], order[j]);
        if costs[hi] <= costs[lo] {
            break;
        }
        let amount = take_cap[hi].min(give_cap[lo]).min(budget);
        pi[hi] += amount;
        pi[lo] -= amount;
        take_cap[hi] -= amount;
        give_cap[lo] -= amount;
        budget -= amount;
        if take_cap[hi] <= 0.0 {
            i += 1;
        }
        if give_cap[lo] <= 0.0 {
            j -= 1;
        }
    }
    let value = pi.iter().zip(costs).map(|(p, c)| p * c).sum();
    Ok((pi, value))
}
