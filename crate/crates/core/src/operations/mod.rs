//! Operational layer for one scenario: LinDistFlow balances and voltage
//! coupling, line-capacity polygons, substation and PV limits, storage, and
//! the network-loss cost with its piecewise-linear surrogate.
//!
//! Voltages are squared magnitudes in p.u.². Line flows are positive in
//! the `from → to` direction. The block can be built either against a fixed
//! plan (the plan enters as constants) or against plan variables of an
//! enclosing master program.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{NetworkInstance, PlanningDecision};
use crate::milp::{
    solve_lp, solve_mip, Backend, LinExpr, MixedIntegerProgram, Relation, RowId, Sense, SolveOptions,
    SolveStatus, SolverSolution, VarId,
};
use crate::uncertainty::{BoxSet, DimKind, NodalData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpsConfig {
    /// Sides of the polygon replacing each line's apparent-power disk.
    pub facets: usize,
    /// Tangent segments per flow component in the loss surrogate.
    pub loss_segments: usize,
    /// Storage mode indicators continuous in `[0, 1]` instead of binary.
    pub relaxed_ess: bool,
}

impl Default for OpsConfig {
    fn default() -> Self {
        OpsConfig {
            facets: 8,
            loss_segments: 8,
            relaxed_ess: true,
        }
    }
}

impl OpsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.facets < 4 || self.facets % 2 != 0 {
            return Err(Error::Domain(format!("facets = {} must be even and at least 4", self.facets)));
        }
        if self.loss_segments == 0 {
            return Err(Error::Domain("loss_segments must be positive".into()));
        }
        Ok(())
    }
}

/// How the first-stage decision enters an operational block.
#[derive(Debug, Clone, Copy)]
pub enum PlanInput<'a> {
    Fixed(&'a PlanningDecision),
    Vars { z: &'a [VarId], y: &'a [VarId] },
}

impl PlanInput<'_> {
    fn z(&self, l: usize) -> LinExpr {
        match self {
            PlanInput::Fixed(d) => LinExpr::constant(if d.z[l] { 1.0 } else { 0.0 }),
            PlanInput::Vars { z, .. } => LinExpr::term(z[l], 1.0),
        }
    }

    fn y(&self, k: usize) -> LinExpr {
        match self {
            PlanInput::Fixed(d) => LinExpr::constant(if d.y[k] { 1.0 } else { 0.0 }),
            PlanInput::Vars { y, .. } => LinExpr::term(y[k], 1.0),
        }
    }

    fn z_fixed(&self, l: usize) -> Option<bool> {
        match self {
            PlanInput::Fixed(d) => Some(d.z[l]),
            PlanInput::Vars { .. } => None,
        }
    }

    fn y_fixed(&self, k: usize) -> Option<bool> {
        match self {
            PlanInput::Fixed(d) => Some(d.y[k]),
            PlanInput::Vars { .. } => None,
        }
    }
}

/// Max-of-tangents under-estimator of `x²` on `[−S, S]` with tangent points
/// at the segment midpoints `(k − ½)·S/K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSurrogate {
    pub smax: f64,
    pub segments: usize,
}

impl LossSurrogate {
    pub fn new(smax: f64, segments: usize) -> Self {
        LossSurrogate { smax, segments }
    }

    pub fn width(&self) -> f64 {
        self.smax / self.segments as f64
    }

    /// Tangent `k` (1-based) of the shifted envelope `W(|x|)`:
    /// `W ≥ slope·|x| − intercept`, with `W(0) = 0`.
    pub fn tangent(&self, k: usize) -> (f64, f64) {
        let h = self.width();
        let k = k as f64;
        ((2.0 * k - 1.0) * h, k * (k - 1.0) * h * h)
    }

    /// Constant subtracted from `W` to obtain the surrogate of `x²`.
    pub fn offset(&self) -> f64 {
        let h = self.width();
        h * h / 4.0
    }

    /// Surrogate value at `x`.
    pub fn value(&self, x: f64) -> f64 {
        let a = x.abs();
        let w = (1..=self.segments)
            .map(|k| {
                let (s, c) = self.tangent(k);
                s * a - c
            })
            .fold(0.0, f64::max);
        w - self.offset()
    }

    /// Largest gap to `x²` on `[−S, S]`.
    pub fn max_gap(&self) -> f64 {
        self.offset()
    }
}

/// Variables of one operational copy. Per-interval vectors are indexed
/// `[element][t]`.
#[derive(Debug, Clone)]
pub struct OperationBlock {
    pub p: Vec<Vec<VarId>>,
    pub q: Vec<Vec<VarId>>,
    pub v: Vec<Vec<VarId>>,
    /// Per substation (in `substation_nodes` order).
    pub p_sub: Vec<Vec<VarId>>,
    pub q_sub: Vec<Vec<VarId>>,
    /// Per station candidate.
    pub pv: Vec<Vec<VarId>>,
    pub ch: Vec<Vec<Option<VarId>>>,
    pub dch: Vec<Vec<Option<VarId>>>,
    pub energy: Vec<Vec<Option<VarId>>>,
    pub g_ch: Vec<Vec<Option<VarId>>>,
    pub g_dch: Vec<Vec<Option<VarId>>>,
    /// Loss epigraph variables per line and interval: `[P part, Q part]`.
    pub w: Vec<Vec<[VarId; 2]>>,
    /// Active and reactive balance rows per node and interval.
    pub p_balance: Vec<Vec<RowId>>,
    pub q_balance: Vec<Vec<RowId>>,
    /// PV availability rows per candidate and interval (only where the
    /// station can be built).
    pub pv_cap: Vec<Vec<Option<RowId>>>,
    /// Annual surrogate loss cost as an expression over block (and plan) variables.
    pub cost: LinExpr,
    /// EV demand placed at each candidate's node (before `y` gating).
    pub ev_at: Vec<Vec<f64>>,
}

/// Right-hand side of `row` moves by `coef·δ[dim]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsLink {
    pub row: RowId,
    pub dim: usize,
    pub coef: f64,
}

/// Per-interval loss weight `η·c^TOU_t·R` of a line.
pub fn loss_weight(inst: &NetworkInstance, l: usize, t: usize) -> f64 {
    inst.horizon.eta_grid_h_per_yr * inst.tariffs.tou_1e4_cny_per_mwh[t] * inst.lines[l].r_eff()
}

/// Big-M of the voltage-drop coupling.
pub fn voltage_big_m(inst: &NetworkInstance) -> f64 {
    let vmax = inst.nodes.iter().map(|n| n.v_max_pu).fold(0.0, f64::max);
    let vmin = inst.nodes.iter().map(|n| n.v_min_pu).fold(f64::INFINITY, f64::min);
    vmax * vmax - vmin * vmin + 2.0 * inst.max_rx() * inst.max_smax()
}

/// Adds all variables of one operational copy with their simple bounds.
fn add_variables(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    cfg: &OpsConfig,
    tag: &str,
) -> OperationBlock {
    let t_len = inst.num_intervals();
    let per_t = |mip: &mut MixedIntegerProgram, name: &str, lo: f64, hi: f64| -> Vec<VarId> {
        (0..t_len).map(|t| mip.add_var(format!("{name}{tag}[{t}]"), lo, hi)).collect()
    };
    let mut b = OperationBlock {
        p: Vec::new(),
        q: Vec::new(),
        v: Vec::new(),
        p_sub: Vec::new(),
        q_sub: Vec::new(),
        pv: Vec::new(),
        ch: Vec::new(),
        dch: Vec::new(),
        energy: Vec::new(),
        g_ch: Vec::new(),
        g_dch: Vec::new(),
        w: Vec::new(),
        p_balance: Vec::new(),
        q_balance: Vec::new(),
        pv_cap: Vec::new(),
        cost: LinExpr::new(),
        ev_at: Vec::new(),
    };
    for (l, line) in inst.lines.iter().enumerate() {
        let s = if plan.z_fixed(l) == Some(false) { 0.0 } else { line.smax_mva };
        b.p.push(per_t(mip, &format!("P{l}"), -s, s));
        b.q.push(per_t(mip, &format!("Q{l}"), -s, s));
        // the steepest tangent reaches S² at |x| = S
        let wmax = s * s;
        b.w.push(
            (0..t_len)
                .map(|t| {
                    [
                        mip.add_var(format!("WP{l}{tag}[{t}]"), 0.0, wmax),
                        mip.add_var(format!("WQ{l}{tag}[{t}]"), 0.0, wmax),
                    ]
                })
                .collect(),
        );
    }
    for (i, node) in inst.nodes.iter().enumerate() {
        let (lo, hi) = match node.substation.as_ref().and_then(|s| s.voltage_pu) {
            Some(v) => (v * v, v * v),
            None => (node.v_min_pu * node.v_min_pu, node.v_max_pu * node.v_max_pu),
        };
        b.v.push(per_t(mip, &format!("V{i}"), lo, hi));
    }
    for i in inst.substation_nodes() {
        let s = inst.nodes[i].substation.as_ref().unwrap();
        b.p_sub.push(per_t(mip, &format!("Psub{i}"), s.p_min_mw, s.p_max_mw));
        b.q_sub.push(per_t(mip, &format!("Qsub{i}"), s.q_min_mvar, s.q_max_mvar));
    }
    for (k, c) in inst.pses.iter().enumerate() {
        let open = plan.y_fixed(k) != Some(false);
        let up = inst
            .uncertainty
            .pv_dev_mw
            .iter()
            .filter(|d| d.node == c.node)
            .flat_map(|d| d.up.iter().copied())
            .fold(0.0, f64::max);
        let pv_hi = if open { c.pv_max_mw.iter().copied().fold(0.0, f64::max) + up } else { 0.0 };
        b.pv.push(per_t(mip, &format!("PV{k}"), 0.0, pv_hi));
        match &c.ess {
            Some(e) if open => {
                let opt = |v: Vec<VarId>| v.into_iter().map(Some).collect::<Vec<_>>();
                b.ch.push(opt(per_t(mip, &format!("Pch{k}"), 0.0, e.p_ch_max_mw)));
                b.dch.push(opt(per_t(mip, &format!("Pdch{k}"), 0.0, e.p_dch_max_mw)));
                b.energy.push(opt(per_t(mip, &format!("E{k}"), e.e_min_mwh, e.e_max_mwh)));
                let gch = per_t(mip, &format!("gch{k}"), 0.0, 1.0);
                let gdch = per_t(mip, &format!("gdch{k}"), 0.0, 1.0);
                if !cfg.relaxed_ess {
                    for &g in gch.iter().chain(&gdch) {
                        mip.set_integer(g, true);
                    }
                }
                b.g_ch.push(opt(gch));
                b.g_dch.push(opt(gdch));
            }
            _ => {
                for v in [&mut b.ch, &mut b.dch, &mut b.energy, &mut b.g_ch, &mut b.g_dch] {
                    v.push(vec![None; t_len]);
                }
            }
        }
    }
    b
}

/// Nodal active/reactive balances and the voltage-drop coupling.
pub fn build_power_flow(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    block: &mut OperationBlock,
    data: &NodalData,
    ev_mw: &[f64],
    tag: &str,
) {
    let t_len = inst.num_intervals();
    let subs = inst.substation_nodes();
    block.ev_at = inst
        .pses
        .iter()
        .map(|c| ev_mw.iter().map(|e| c.ev_share * e).collect())
        .collect();
    block.p_balance = vec![Vec::with_capacity(t_len); inst.num_nodes()];
    block.q_balance = vec![Vec::with_capacity(t_len); inst.num_nodes()];
    for i in 0..inst.num_nodes() {
        let sub_idx = subs.iter().position(|&s| s == i);
        let stations: Vec<usize> = (0..inst.pses.len()).filter(|&k| inst.pses[k].node == i).collect();
        for t in 0..t_len {
            let mut pe = LinExpr::new();
            let mut qe = LinExpr::new();
            for l in inst.lines_at(i) {
                let sign = if inst.lines[l].to == i { 1.0 } else { -1.0 };
                pe.add(block.p[l][t], sign);
                qe.add(block.q[l][t], sign);
            }
            if let Some(s) = sub_idx {
                pe.add(block.p_sub[s][t], 1.0);
                qe.add(block.q_sub[s][t], 1.0);
            }
            for &k in &stations {
                pe.add(block.pv[k][t], 1.0);
                if let (Some(ch), Some(dch)) = (block.ch[k][t], block.dch[k][t]) {
                    pe.add(dch, 1.0);
                    pe.add(ch, -1.0);
                }
                // EV demand of a built station
                pe.add_expr(&plan.y(k), -block.ev_at[k][t]);
            }
            let pr = mip.add_constraint(
                format!("pbal{tag}[{i},{t}]"),
                &pe,
                Relation::Eq,
                &LinExpr::constant(data.p_load[i][t]),
            );
            let qr = mip.add_constraint(
                format!("qbal{tag}[{i},{t}]"),
                &qe,
                Relation::Eq,
                &LinExpr::constant(data.q_load[i][t]),
            );
            block.p_balance[i].push(pr);
            block.q_balance[i].push(qr);
        }
    }
    let big_m = voltage_big_m(inst);
    for (l, line) in inst.lines.iter().enumerate() {
        let (r, x) = (line.r_eff(), line.x_eff());
        for t in 0..t_len {
            let mut drop = LinExpr::new();
            drop.add(block.v[line.from][t], 1.0)
                .add(block.v[line.to][t], -1.0)
                .add(block.p[l][t], -2.0 * r)
                .add(block.q[l][t], -2.0 * x);
            match plan.z_fixed(l) {
                Some(true) => {
                    mip.add_row(format!("vdrop{tag}[{l},{t}]"), drop.compact(), Relation::Eq, 0.0);
                }
                Some(false) => {}
                None => {
                    // |drop| ≤ (1 − z)·M
                    let mut slack = LinExpr::constant(big_m);
                    slack.add_expr(&plan.z(l), -big_m);
                    mip.add_constraint(format!("vdrop+{tag}[{l},{t}]"), &drop, Relation::Le, &slack);
                    let mut neg = LinExpr::new();
                    neg.add_expr(&drop, -1.0);
                    mip.add_constraint(format!("vdrop-{tag}[{l},{t}]"), &neg, Relation::Le, &slack);
                }
            }
        }
    }
}

/// Unit normals of the inscribed polygon with a vertex on each axis.
pub fn polygon_normals(facets: usize) -> Vec<(f64, f64)> {
    let step = 2.0 * std::f64::consts::PI / facets as f64;
    (0..facets)
        .map(|j| {
            let phi = step * (j as f64 + 0.5);
            (phi.cos(), phi.sin())
        })
        .collect()
}

/// Half-plane offset of the polygon inscribed in the circle of radius `s`.
pub fn polygon_offset(facets: usize, s: f64) -> f64 {
    s * (std::f64::consts::PI / facets as f64).cos()
}

/// True when `(p, q)` lies in the polygon of `facets` sides inscribed in
/// the disk of radius `z·s`.
pub fn polygon_contains(facets: usize, s: f64, z: bool, p: f64, q: f64, tol: f64) -> bool {
    let rhs = if z { polygon_offset(facets, s) } else { 0.0 };
    if !z {
        return p.abs() <= tol && q.abs() <= tol;
    }
    polygon_normals(facets).iter().all(|&(a, b)| a * p + b * q <= rhs + tol)
}

/// Line-capacity polygons. Voltage bands are carried by the variable bounds.
pub fn build_security(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    block: &OperationBlock,
    facets: usize,
    tag: &str,
) {
    let normals = polygon_normals(facets);
    for (l, line) in inst.lines.iter().enumerate() {
        if plan.z_fixed(l) == Some(false) {
            continue;
        }
        let mut cap = LinExpr::new();
        cap.add_expr(&plan.z(l), polygon_offset(facets, line.smax_mva));
        for t in 0..inst.num_intervals() {
            for (j, &(a, b)) in normals.iter().enumerate() {
                let mut e = LinExpr::new();
                if a.abs() > 1e-15 {
                    e.add(block.p[l][t], a);
                }
                if b.abs() > 1e-15 {
                    e.add(block.q[l][t], b);
                }
                mip.add_constraint(format!("sec{tag}[{l},{t},{j}]"), &e, Relation::Le, &cap);
            }
        }
    }
}

/// PV availability `P^PV ≤ y·P^PV,max`. Substation limits are variable bounds.
pub fn build_substation_pv(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    block: &mut OperationBlock,
    data: &NodalData,
    tag: &str,
) {
    block.pv_cap = Vec::with_capacity(inst.pses.len());
    for k in 0..inst.pses.len() {
        let mut rows = Vec::with_capacity(inst.num_intervals());
        for t in 0..inst.num_intervals() {
            if plan.y_fixed(k) == Some(false) {
                mip.fix(block.pv[k][t], 0.0);
                rows.push(None);
                continue;
            }
            let mut cap = LinExpr::new();
            cap.add_expr(&plan.y(k), data.pv_avail[k][t]);
            let r = mip.add_constraint(
                format!("pvcap{tag}[{k},{t}]"),
                &LinExpr::term(block.pv[k][t], 1.0),
                Relation::Le,
                &cap,
            );
            rows.push(Some(r));
        }
        block.pv_cap.push(rows);
    }
}

/// Storage recursion, mode-gated power limits and the exclusivity row.
pub fn build_ess(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    block: &OperationBlock,
    tag: &str,
) {
    let dt = inst.horizon.dt_hours();
    for (k, c) in inst.pses.iter().enumerate() {
        let Some(e) = &c.ess else { continue };
        if block.ch[k][0].is_none() {
            continue;
        }
        for t in 0..inst.num_intervals() {
            let ch = block.ch[k][t].unwrap();
            let dch = block.dch[k][t].unwrap();
            let en = block.energy[k][t].unwrap();
            let gch = block.g_ch[k][t].unwrap();
            let gdch = block.g_dch[k][t].unwrap();
            // E_t − E_{t−1} − μch·Δt·ch + Δt/μdch·dch = 0
            let mut rec = vec![(en, 1.0), (ch, -e.mu_ch * dt), (dch, dt / e.mu_dch)];
            let rhs = if t == 0 {
                e.e_initial_mwh
            } else {
                rec.push((block.energy[k][t - 1].unwrap(), -1.0));
                0.0
            };
            mip.add_row(format!("soc{tag}[{k},{t}]"), rec, Relation::Eq, rhs);
            mip.add_row(
                format!("chmax{tag}[{k},{t}]"),
                vec![(ch, 1.0), (gch, -e.p_ch_max_mw)],
                Relation::Le,
                0.0,
            );
            mip.add_row(
                format!("dchmax{tag}[{k},{t}]"),
                vec![(dch, 1.0), (gdch, -e.p_dch_max_mw)],
                Relation::Le,
                0.0,
            );
            if e.p_min_mw > 0.0 {
                mip.add_row(
                    format!("chmin{tag}[{k},{t}]"),
                    vec![(ch, 1.0), (gch, -e.p_min_mw)],
                    Relation::Ge,
                    0.0,
                );
                mip.add_row(
                    format!("dchmin{tag}[{k},{t}]"),
                    vec![(dch, 1.0), (gdch, -e.p_min_mw)],
                    Relation::Ge,
                    0.0,
                );
            }
            let mut excl = LinExpr::new();
            excl.add(gch, 1.0).add(gdch, 1.0);
            mip.add_constraint(format!("gex{tag}[{k},{t}]"), &excl, Relation::Le, &plan.y(k));
        }
    }
}

/// Tangent rows of the loss epigraph and the annual surrogate cost.
pub fn build_loss_surrogate(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    block: &mut OperationBlock,
    segments: usize,
    tag: &str,
) {
    let mut cost = LinExpr::new();
    for (l, line) in inst.lines.iter().enumerate() {
        if plan.z_fixed(l) == Some(false) {
            continue;
        }
        let sur = LossSurrogate::new(line.smax_mva, segments);
        for t in 0..inst.num_intervals() {
            let weight = loss_weight(inst, l, t);
            for (c, flow) in [block.p[l][t], block.q[l][t]].into_iter().enumerate() {
                let w = block.w[l][t][c];
                for k in 1..=segments {
                    let (s, ic) = sur.tangent(k);
                    for sign in [1.0, -1.0] {
                        // perspective form W ≥ s|x| − ic·z, identical for integral z
                        let mut row = LinExpr::term(w, 1.0).with(flow, -sign * s);
                        row.add_expr(&plan.z(l), ic);
                        mip.add_constraint(
                            format!("loss{tag}[{l},{t},{c},{k},{}]", if sign > 0.0 { '+' } else { '-' }),
                            &row,
                            Relation::Ge,
                            &LinExpr::new(),
                        );
                    }
                }
                cost.add(w, weight);
                cost.add_expr(&plan.z(l), -weight * sur.offset());
            }
        }
    }
    block.cost = cost;
}

/// One complete operational copy.
#[allow(clippy::too_many_arguments)]
pub fn build_operation(
    inst: &NetworkInstance,
    mip: &mut MixedIntegerProgram,
    plan: PlanInput,
    data: &NodalData,
    ev_mw: &[f64],
    cfg: &OpsConfig,
    tag: &str,
) -> OperationBlock {
    let mut block = add_variables(inst, mip, plan, cfg, tag);
    build_power_flow(inst, mip, plan, &mut block, data, ev_mw, tag);
    build_security(inst, mip, plan, &block, cfg.facets, tag);
    build_substation_pv(inst, mip, plan, &mut block, data, tag);
    build_ess(inst, mip, plan, &block, tag);
    build_loss_surrogate(inst, mip, plan, &mut block, cfg.loss_segments, tag);
    block
}

/// How each box dimension moves the block's right-hand sides under a fixed plan.
pub fn rhs_links(inst: &NetworkInstance, plan: &PlanningDecision, block: &OperationBlock, boxset: &BoxSet) -> Vec<RhsLink> {
    let mut out = Vec::new();
    for (dim, d) in boxset.dims.iter().enumerate() {
        match d.kind {
            DimKind::ActiveLoad => out.push(RhsLink {
                row: block.p_balance[d.node][d.t],
                dim,
                coef: 1.0,
            }),
            DimKind::ReactiveLoad => out.push(RhsLink {
                row: block.q_balance[d.node][d.t],
                dim,
                coef: 1.0,
            }),
            DimKind::PvAvailability => {
                let k = inst.pses_at(d.node).expect("validated PV deviation node");
                if plan.y[k] {
                    if let Some(row) = block.pv_cap[k][d.t] {
                        out.push(RhsLink { row, dim, coef: 1.0 });
                    }
                }
            }
        }
    }
    out
}

/// Values of one operational copy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub p_line: Vec<Vec<f64>>,
    pub q_line: Vec<Vec<f64>>,
    /// Squared voltage magnitudes.
    pub v_sq: Vec<Vec<f64>>,
    pub p_sub: Vec<Vec<f64>>,
    pub q_sub: Vec<Vec<f64>>,
    pub pv: Vec<Vec<f64>>,
    pub ess_ch: Vec<Vec<f64>>,
    pub ess_dch: Vec<Vec<f64>>,
    pub ess_energy: Vec<Vec<f64>>,
    pub gamma_ch: Vec<Vec<f64>>,
    pub gamma_dch: Vec<Vec<f64>>,
    /// EV demand served at each candidate.
    pub ev: Vec<Vec<f64>>,
    /// Grid-side demand per node.
    pub p_grid: Vec<Vec<f64>>,
    pub q_grid: Vec<Vec<f64>>,
}

impl OperatingPoint {
    pub fn extract(plan: &PlanningDecision, block: &OperationBlock, data: &NodalData, x: &[f64]) -> Self {
        let val = |vs: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            vs.iter().map(|r| r.iter().map(|v| x[v.0]).collect()).collect()
        };
        let opt = |vs: &Vec<Vec<Option<VarId>>>| -> Vec<Vec<f64>> {
            vs.iter()
                .map(|r| r.iter().map(|v| v.map_or(0.0, |v| x[v.0])).collect())
                .collect()
        };
        OperatingPoint {
            p_line: val(&block.p),
            q_line: val(&block.q),
            v_sq: val(&block.v),
            p_sub: val(&block.p_sub),
            q_sub: val(&block.q_sub),
            pv: val(&block.pv),
            ess_ch: opt(&block.ch),
            ess_dch: opt(&block.dch),
            ess_energy: opt(&block.energy),
            gamma_ch: opt(&block.g_ch),
            gamma_dch: opt(&block.g_dch),
            ev: block
                .ev_at
                .iter()
                .zip(&plan.y)
                .map(|(e, &b)| e.iter().map(|v| if b { *v } else { 0.0 }).collect())
                .collect(),
            p_grid: data.p_load.clone(),
            q_grid: data.q_load.clone(),
        }
    }

    pub fn intervals(&self) -> usize {
        self.v_sq.first().map_or(0, Vec::len)
    }

    /// Voltage magnitudes in p.u.
    pub fn voltages(&self) -> Vec<Vec<f64>> {
        self.v_sq
            .iter()
            .map(|r| r.iter().map(|v| v.max(0.0).sqrt()).collect())
            .collect()
    }
}

/// Exact quadratic loss cost `η·Σ_t Σ_l c_t·R_l·(P² + Q²)`.
pub fn operation_cost_true(op: &OperatingPoint, inst: &NetworkInstance) -> f64 {
    let mut total = 0.0;
    for l in 0..inst.num_lines() {
        for t in 0..inst.num_intervals() {
            let (p, q) = (op.p_line[l][t], op.q_line[l][t]);
            total += loss_weight(inst, l, t) * (p * p + q * q);
        }
    }
    total
}

/// Piecewise-linear loss cost of the built lines of `plan`.
pub fn operation_cost_surrogate(
    op: &OperatingPoint,
    plan: &PlanningDecision,
    segments: usize,
    inst: &NetworkInstance,
) -> f64 {
    let mut total = 0.0;
    for (l, line) in inst.lines.iter().enumerate() {
        if !plan.z[l] {
            continue;
        }
        let sur = LossSurrogate::new(line.smax_mva, segments);
        for t in 0..inst.num_intervals() {
            total += loss_weight(inst, l, t) * (sur.value(op.p_line[l][t]) + sur.value(op.q_line[l][t]));
        }
    }
    total
}

/// Upper bound on `true − surrogate` for `plan`.
pub fn surrogate_gap_bound(plan: &PlanningDecision, segments: usize, inst: &NetworkInstance) -> f64 {
    let mut total = 0.0;
    for (l, line) in inst.lines.iter().enumerate() {
        if !plan.z[l] {
            continue;
        }
        let sur = LossSurrogate::new(line.smax_mva, segments);
        for t in 0..inst.num_intervals() {
            total += loss_weight(inst, l, t) * 2.0 * sur.max_gap();
        }
    }
    total
}

/// Inner operational problem of a fixed plan at fixed data, solved on its own.
#[derive(Debug, Clone)]
pub struct OperationSolution {
    pub cost: f64,
    pub point: OperatingPoint,
    pub solution: SolverSolution,
}

pub fn build_fixed_plan_lp(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    data: &NodalData,
    ev_mw: &[f64],
    cfg: &OpsConfig,
) -> (MixedIntegerProgram, OperationBlock) {
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let block = build_operation(inst, &mut mip, PlanInput::Fixed(plan), data, ev_mw, cfg, "");
    mip.add_objective(&block.cost, 1.0);
    (mip, block)
}

/// Minimum surrogate loss cost of `plan` at the given data; `Ok(None)` when
/// the operational constraints cannot be met.
pub fn solve_operation(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    data: &NodalData,
    ev_mw: &[f64],
    cfg: &OpsConfig,
    opts: &SolveOptions,
) -> Result<Option<OperationSolution>> {
    cfg.validate()?;
    let (mip, block) = build_fixed_plan_lp(inst, plan, data, ev_mw, cfg);
    let sol = if mip.is_lp() { solve_lp(&mip, opts)? } else { solve_mip(&mip, 0.0, opts)? };
    if sol.status == SolveStatus::Infeasible {
        return Ok(None);
    }
    let sol = sol.require("solving the operational problem")?;
    let point = OperatingPoint::extract(plan, &block, data, &sol.x);
    Ok(Some(OperationSolution {
        cost: sol.objective,
        point,
        solution: sol,
    }))
}

/// Re-solves with the cost held at its optimum while minimizing storage
/// throughput, then sets each mode indicator to its power over the rating.
/// The result is a representative optimum in which no storage unit charges
/// and discharges in the same interval, whenever such an optimum exists.
pub fn canonicalize_ess(
    inst: &NetworkInstance,
    plan: &PlanningDecision,
    data: &NodalData,
    ev_mw: &[f64],
    cfg: &OpsConfig,
    optimum: f64,
    opts: &SolveOptions,
) -> Result<OperatingPoint> {
    let relaxed = OpsConfig { relaxed_ess: true, ..*cfg };
    let (mut mip, block) = build_fixed_plan_lp(inst, plan, data, ev_mw, &relaxed);
    let tol = 1e-9 * optimum.abs().max(1.0);
    mip.add_constraint("costcap", &block.cost, Relation::Le, &LinExpr::constant(optimum + tol));
    for v in mip.vars.iter_mut() {
        v.cost = 0.0;
    }
    for k in 0..inst.pses.len() {
        for t in 0..inst.num_intervals() {
            if let (Some(ch), Some(dch)) = (block.ch[k][t], block.dch[k][t]) {
                mip.set_cost(ch, 1.0);
                mip.set_cost(dch, 1.0);
            }
        }
    }
    let sol = solve_lp(&mip, opts)?.require("canonicalizing storage dispatch")?;
    let mut point = OperatingPoint::extract(plan, &block, data, &sol.x);
    for (k, c) in inst.pses.iter().enumerate() {
        if let Some(e) = &c.ess {
            for t in 0..inst.num_intervals() {
                let ratio = |p: f64, cap: f64| if cap > 0.0 { p / cap } else { 0.0 };
                point.gamma_ch[k][t] = ratio(point.ess_ch[k][t], e.p_ch_max_mw);
                point.gamma_dch[k][t] = ratio(point.ess_dch[k][t], e.p_dch_max_mw);
            }
        }
    }
    Ok(point)
}

/// Default solver choice for operational programs.
pub fn default_solve_options() -> SolveOptions {
    SolveOptions::with_backend(Backend::Highs)
}
