//! Problem instance, planning decision and investment accounting.
//!
//! Money is in units of 10⁴ CNY throughout; energy prices are therefore
//! 10⁴ CNY/MWh (0.4 CNY/kWh = 0.04). Powers are MW/MVar, energies MWh.

pub mod builtin;

pub use builtin::{
    coarsen, coastal47_synthetic, demo6, generate_coastal47, generate_demo6, graph_instance, random_instance, BuiltinInstance,
    RandomInstanceSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstationSpec {
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub q_min_mvar: f64,
    pub q_max_mvar: f64,
    /// Fixed voltage magnitude at the substation bus; free within the band when absent.
    #[serde(default)]
    pub voltage_pu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    /// Reference active demand P₀ per interval.
    pub p_load_mw: Vec<f64>,
    /// Reference reactive demand Q₀ per interval.
    pub q_load_mvar: Vec<f64>,
    pub v_min_pu: f64,
    pub v_max_pu: f64,
    #[serde(default)]
    pub substation: Option<SubstationSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineSpec {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub smax_mva: f64,
    pub base_kv: f64,
    pub length_km: f64,
    pub cost_1e4_cny: f64,
    pub salt_1e4_cny_per_yr: f64,
}

impl LineSpec {
    /// Resistance in the per-unit system where `V²` is in p.u.² and power in MW.
    pub fn r_eff(&self) -> f64 {
        self.r_ohm / (self.base_kv * self.base_kv)
    }

    pub fn x_eff(&self) -> f64 {
        self.x_ohm / (self.base_kv * self.base_kv)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaSpec {
    pub name: String,
    pub nodes: Vec<usize>,
    pub carbon_price_1e4_cny_per_t: f64,
    pub pses_min: usize,
    pub pses_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EssSpec {
    pub p_min_mw: f64,
    pub p_ch_max_mw: f64,
    pub p_dch_max_mw: f64,
    pub e_min_mwh: f64,
    pub e_max_mwh: f64,
    pub mu_ch: f64,
    pub mu_dch: f64,
    pub e_initial_mwh: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsesCandidate {
    pub node: usize,
    pub cost_1e4_cny: f64,
    pub salt_1e4_cny_per_yr: f64,
    /// PV availability per interval.
    pub pv_max_mw: Vec<f64>,
    #[serde(default)]
    pub ess: Option<EssSpec>,
    /// Fraction of each EV scenario's cluster demand served at this site.
    pub ev_share: f64,
    /// Candidate sits at the end of a feeder (used by the fixed-siting case).
    #[serde(default)]
    pub feeder_end: bool,
    /// Subsidy earned per year by a built station, independent of dispatch.
    #[serde(default)]
    pub fixed_subsidy_1e4_cny_per_yr: f64,
    /// Energy subsidy per MWh of PV generation.
    #[serde(default)]
    pub pv_subsidy_1e4_cny_per_mwh: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenUnitSpec {
    pub cap_mw: Vec<f64>,
    pub price_1e4_cny_per_mwh: Vec<f64>,
    pub intensity_t_per_mwh: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitsSpec {
    pub thermal: GenUnitSpec,
    pub tidal: GenUnitSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TariffSpec {
    /// Loss valuation price c^TOU per interval.
    pub tou_1e4_cny_per_mwh: Vec<f64>,
    /// Price seen by EV owners when scheduling charging.
    pub ev_1e4_cny_per_mwh: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonSpec {
    pub intervals: usize,
    /// Weight turning one interval's MW-valued cost rate into a yearly
    /// amount: 365 days times the interval length in hours.
    pub eta_grid_h_per_yr: f64,
}

impl HorizonSpec {
    pub fn dt_hours(&self) -> f64 {
        24.0 / self.intervals as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinanceSpec {
    pub discount_rate: f64,
    pub line_life_yr: u32,
    pub pses_life_yr: u32,
}

/// Half-widths of a box deviation at one node, per interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDeviation {
    pub node: usize,
    pub down: Vec<f64>,
    pub up: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertaintySpec {
    pub pi0: Vec<f64>,
    pub alpha1: f64,
    pub alpha_inf: f64,
    /// Cluster EV demand per scenario and interval.
    pub ev_scenarios_mw: Vec<Vec<f64>>,
    #[serde(default)]
    pub p_dev_mw: Vec<NodeDeviation>,
    #[serde(default)]
    pub q_dev_mvar: Vec<NodeDeviation>,
    /// Deviations of PV availability, indexed by candidate node.
    #[serde(default)]
    pub pv_dev_mw: Vec<NodeDeviation>,
}

/// Cost data of a plain EV charging station (no PV, no storage), used when
/// comparing against PSES siting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConventionalStationSpec {
    pub cost_1e4_cny: f64,
    pub salt_1e4_cny_per_yr: f64,
    pub life_yr: u32,
}

/// Immutable problem description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub nodes: Vec<NodeSpec>,
    pub lines: Vec<LineSpec>,
    pub areas: Vec<AreaSpec>,
    pub pses: Vec<PsesCandidate>,
    pub units: UnitsSpec,
    pub tariffs: TariffSpec,
    pub horizon: HorizonSpec,
    pub finance: FinanceSpec,
    pub uncertainty: UncertaintySpec,
    #[serde(default)]
    pub conventional_station: Option<ConventionalStationSpec>,
}

impl NetworkInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.horizon.intervals
    }

    pub fn num_scenarios(&self) -> usize {
        self.uncertainty.pi0.len()
    }

    pub fn substation_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].substation.is_some())
            .collect()
    }

    pub fn is_substation(&self, i: usize) -> bool {
        self.nodes[i].substation.is_some()
    }

    /// Candidate index located at `node`, if any.
    pub fn pses_at(&self, node: usize) -> Option<usize> {
        self.pses.iter().position(|c| c.node == node)
    }

    pub fn area_of(&self, node: usize) -> Option<usize> {
        self.areas.iter().position(|a| a.nodes.contains(&node))
    }

    pub fn lines_at(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.lines.len()).filter(move |&l| self.lines[l].from == node || self.lines[l].to == node)
    }

    /// Largest `R + X` over candidate lines, in effective units.
    pub fn max_rx(&self) -> f64 {
        self.lines
            .iter()
            .map(|l| l.r_eff() + l.x_eff())
            .fold(0.0, f64::max)
    }

    pub fn max_smax(&self) -> f64 {
        self.lines.iter().map(|l| l.smax_mva).fold(0.0, f64::max)
    }
}

/// First-stage decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningDecision {
    /// Built lines.
    pub z: Vec<bool>,
    /// Built stations, per candidate.
    pub y: Vec<bool>,
    /// Per line: `[to is the parent of from, from is the parent of to]`.
    pub y_parent: Vec<[bool; 2]>,
}

impl PlanningDecision {
    pub fn empty(inst: &NetworkInstance) -> Self {
        PlanningDecision {
            z: vec![false; inst.num_lines()],
            y: vec![false; inst.pses.len()],
            y_parent: vec![[false, false]; inst.num_lines()],
        }
    }

    /// Orients the built lines away from the substations. Fails when the
    /// built lines do not form a spanning forest with one substation per tree.
    pub fn from_build(inst: &NetworkInstance, z: Vec<bool>, y: Vec<bool>) -> Result<Self> {
        if z.len() != inst.num_lines() || y.len() != inst.pses.len() {
            return Err(Error::DimensionMismatch(format!(
                "plan has {} lines / {} stations, instance {} / {}",
                z.len(),
                y.len(),
                inst.num_lines(),
                inst.pses.len()
            )));
        }
        let y_parent = crate::topology::orient(inst, &z).ok_or_else(|| {
            Error::Domain("built lines do not form a substation-rooted spanning forest".into())
        })?;
        Ok(PlanningDecision { z, y, y_parent })
    }

    pub fn num_built_lines(&self) -> usize {
        self.z.iter().filter(|&&b| b).count()
    }

    pub fn num_built_stations(&self) -> usize {
        self.y.iter().filter(|&&b| b).count()
    }
}

/// Capital recovery factor `ρ(1+ρ)ⁿ/((1+ρ)ⁿ − 1)`.
pub fn annualization_factor(rate: f64, years: u32) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain(format!("discount rate {rate} outside (0, 1)")));
    }
    if years < 1 {
        return Err(Error::Domain("lifetime must be at least one year".into()));
    }
    let g = (1.0 + rate).powi(years as i32);
    Ok(rate * g / (g - 1.0))
}

/// Breakdown of the investment objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct InvestmentCost {
    pub lines: f64,
    pub pses: f64,
    pub salt: f64,
}

impl InvestmentCost {
    pub fn total(&self) -> f64 {
        self.lines + self.pses + self.salt
    }
}

/// Annualized line and station capital plus the yearly salt-spray terms.
pub fn investment_cost(decision: &PlanningDecision, inst: &NetworkInstance) -> Result<InvestmentCost> {
    if decision.z.len() != inst.num_lines() || decision.y.len() != inst.pses.len() {
        return Err(Error::DimensionMismatch(format!(
            "decision has {} lines / {} stations, instance {} / {}",
            decision.z.len(),
            decision.y.len(),
            inst.num_lines(),
            inst.pses.len()
        )));
    }
    let f = &inst.finance;
    let a_line = annualization_factor(f.discount_rate, f.line_life_yr)?;
    let a_pses = annualization_factor(f.discount_rate, f.pses_life_yr)?;
    let mut out = InvestmentCost::default();
    for (l, line) in inst.lines.iter().enumerate() {
        if decision.z[l] {
            out.lines += a_line * line.cost_1e4_cny;
            out.salt += line.salt_1e4_cny_per_yr;
        }
    }
    for (k, c) in inst.pses.iter().enumerate() {
        if decision.y[k] {
            out.pses += a_pses * c.cost_1e4_cny;
            out.salt += c.salt_1e4_cny_per_yr;
        }
    }
    Ok(out)
}

/// Coefficients of the investment objective as linear costs on `z` and `y`.
pub fn investment_coefficients(inst: &NetworkInstance) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = &inst.finance;
    let a_line = annualization_factor(f.discount_rate, f.line_life_yr)?;
    let a_pses = annualization_factor(f.discount_rate, f.pses_life_yr)?;
    let cz = inst
        .lines
        .iter()
        .map(|l| a_line * l.cost_1e4_cny + l.salt_1e4_cny_per_yr)
        .collect();
    let cy = inst
        .pses
        .iter()
        .map(|c| a_pses * c.cost_1e4_cny + c.salt_1e4_cny_per_yr)
        .collect();
    Ok((cz, cy))
}

fn check_len(diags: &mut Vec<String>, what: &str, len: usize, t: usize) {
    if len != t {
        diags.push(format!("{what}: profile length {len}, expected {t}"));
    }
}

fn check_finite(diags: &mut Vec<String>, what: &str, values: &[f64]) {
    if values.iter().any(|v| !v.is_finite()) {
        diags.push(format!("{what}: non-finite value"));
    }
}

/// Lists every violated instance invariant; empty when the instance is well formed.
pub fn validate_instance(inst: &NetworkInstance) -> Vec<String> {
    let mut d = Vec::new();
    let n = inst.num_nodes();
    let t = inst.horizon.intervals;
    if n == 0 {
        d.push("instance has no nodes".into());
        return d;
    }
    if t == 0 {
        d.push("horizon has zero intervals".into());
        return d;
    }
    if !(inst.horizon.eta_grid_h_per_yr > 0.0) {
        d.push("horizon: eta_grid_h_per_yr must be positive".into());
    }
    if inst.substation_nodes().is_empty() {
        d.push("no substation node".into());
    }
    for (i, node) in inst.nodes.iter().enumerate() {
        let tag = format!("node {i} ({})", node.name);
        check_len(&mut d, &format!("{tag} p_load_mw"), node.p_load_mw.len(), t);
        check_len(&mut d, &format!("{tag} q_load_mvar"), node.q_load_mvar.len(), t);
        check_finite(&mut d, &tag, &node.p_load_mw);
        check_finite(&mut d, &tag, &node.q_load_mvar);
        if !(node.v_min_pu > 0.0 && node.v_min_pu < node.v_max_pu) {
            d.push(format!(
                "{tag}: voltage band [{}, {}] must satisfy 0 < v_min < v_max",
                node.v_min_pu, node.v_max_pu
            ));
        }
        if let Some(s) = &node.substation {
            if !(s.p_min_mw <= s.p_max_mw && s.q_min_mvar <= s.q_max_mvar) {
                d.push(format!("{tag}: substation bounds inverted"));
            }
            if let Some(v) = s.voltage_pu {
                if v < node.v_min_pu || v > node.v_max_pu {
                    d.push(format!("{tag}: substation voltage {v} outside band"));
                }
            }
        }
    }
    for (l, line) in inst.lines.iter().enumerate() {
        let tag = format!("line {l} ({}-{})", line.from, line.to);
        if line.from >= n || line.to >= n {
            d.push(format!("{tag}: endpoint out of range"));
            continue;
        }
        if line.from == line.to {
            d.push(format!("{tag}: self loop"));
        }
        if !(line.r_ohm > 0.0) {
            d.push(format!("{tag}: r_ohm must be positive"));
        }
        if !(line.x_ohm > 0.0) {
            d.push(format!("{tag}: x_ohm must be positive"));
        }
        if !(line.smax_mva > 0.0) {
            d.push(format!("{tag}: smax_mva must be positive"));
        }
        if !(line.base_kv > 0.0) {
            d.push(format!("{tag}: base_kv must be positive"));
        }
        if line.cost_1e4_cny < 0.0 || line.salt_1e4_cny_per_yr < 0.0 {
            d.push(format!("{tag}: negative cost"));
        }
    }
    // areas partition the non-substation nodes
    let mut owner = vec![usize::MAX; n];
    for (k, area) in inst.areas.iter().enumerate() {
        for &i in &area.nodes {
            if i >= n {
                d.push(format!("area {k} ({}): node {i} out of range", area.name));
            } else if inst.is_substation(i) {
                d.push(format!("area {k} ({}): contains substation node {i}", area.name));
            } else if owner[i] != usize::MAX {
                d.push(format!("node {i} belongs to areas {} and {k}", owner[i]));
            } else {
                owner[i] = k;
            }
        }
        if area.pses_min > area.pses_max {
            d.push(format!("area {k} ({}): pses_min > pses_max", area.name));
        }
        let available = inst
            .pses
            .iter()
            .filter(|c| area.nodes.contains(&c.node))
            .count();
        if area.pses_min > available {
            d.push(format!(
                "area {k} ({}): pses_min {} exceeds its {available} candidates",
                area.name, area.pses_min
            ));
        }
    }
    for i in 0..n {
        if !inst.is_substation(i) && owner[i] == usize::MAX {
            d.push(format!("node {i} ({}) not assigned to any area", inst.nodes[i].name));
        }
    }
    let min_total: usize = inst.areas.iter().map(|a| a.pses_min).sum();
    if min_total > inst.pses.len() {
        d.push(format!(
            "areas require {min_total} stations but only {} candidates exist",
            inst.pses.len()
        ));
    }
    let mut seen = vec![false; n];
    for (k, c) in inst.pses.iter().enumerate() {
        let tag = format!("pses candidate {k} (node {})", c.node);
        if c.node >= n {
            d.push(format!("{tag}: node out of range"));
            continue;
        }
        if seen[c.node] {
            d.push(format!("{tag}: duplicate candidate node"));
        }
        seen[c.node] = true;
        check_len(&mut d, &format!("{tag} pv_max_mw"), c.pv_max_mw.len(), t);
        if c.pv_max_mw.iter().any(|&v| v < 0.0) {
            d.push(format!("{tag}: negative PV availability"));
        }
        if !(c.ev_share >= 0.0) {
            d.push(format!("{tag}: ev_share must be nonnegative"));
        }
        if c.cost_1e4_cny < 0.0 || c.salt_1e4_cny_per_yr < 0.0 {
            d.push(format!("{tag}: negative cost"));
        }
        if let Some(e) = &c.ess {
            d.extend(validate_ess(e).into_iter().map(|m| format!("{tag}: {m}")));
        }
    }
    for (name, u) in [("thermal", &inst.units.thermal), ("tidal", &inst.units.tidal)] {
        check_len(&mut d, &format!("{name} cap_mw"), u.cap_mw.len(), t);
        check_len(&mut d, &format!("{name} price"), u.price_1e4_cny_per_mwh.len(), t);
        check_len(&mut d, &format!("{name} intensity"), u.intensity_t_per_mwh.len(), t);
        if u.cap_mw.iter().chain(&u.intensity_t_per_mwh).any(|&v| !(v >= 0.0)) {
            d.push(format!("{name}: capacities and intensities must be nonnegative"));
        }
    }
    check_len(&mut d, "tariff tou", inst.tariffs.tou_1e4_cny_per_mwh.len(), t);
    check_len(&mut d, "tariff ev", inst.tariffs.ev_1e4_cny_per_mwh.len(), t);
    let f = &inst.finance;
    if !(f.discount_rate > 0.0 && f.discount_rate < 1.0) {
        d.push(format!("finance: discount rate {} outside (0, 1)", f.discount_rate));
    }
    if f.line_life_yr < 1 || f.pses_life_yr < 1 {
        d.push("finance: lifetimes must be at least one year".into());
    }

    let u = &inst.uncertainty;
    let s = u.pi0.len();
    if s == 0 {
        d.push("uncertainty: no EV scenarios".into());
    } else {
        if u.pi0.iter().any(|&p| !(p >= 0.0)) || (u.pi0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            d.push("uncertainty: pi0 is not a probability vector".into());
        }
        if u.ev_scenarios_mw.len() != s {
            d.push(format!(
                "uncertainty: {} EV scenario profiles for {s} probabilities",
                u.ev_scenarios_mw.len()
            ));
        }
        for (k, prof) in u.ev_scenarios_mw.iter().enumerate() {
            check_len(&mut d, &format!("EV scenario {k}"), prof.len(), t);
        }
    }
    for (name, a) in [("alpha1", u.alpha1), ("alpha_inf", u.alpha_inf)] {
        if !(a > 0.0 && a < 1.0) {
            d.push(format!("uncertainty: {name} = {a} outside (0, 1)"));
        }
    }
    for (kind, devs) in [("p_dev", &u.p_dev_mw), ("q_dev", &u.q_dev_mvar), ("pv_dev", &u.pv_dev_mw)] {
        for dev in devs {
            let tag = format!("uncertainty {kind} node {}", dev.node);
            if dev.node >= n {
                d.push(format!("{tag}: node out of range"));
            }
            check_len(&mut d, &tag, dev.down.len(), t);
            check_len(&mut d, &tag, dev.up.len(), t);
            if dev.down.iter().chain(&dev.up).any(|&v| !(v >= 0.0)) {
                d.push(format!("{tag}: deviations must be nonnegative"));
            }
            if kind == "pv_dev" && inst.pses_at(dev.node).is_none() {
                d.push(format!("{tag}: no station candidate at node"));
            }
        }
    }
    if d.is_empty() {
        d.extend(load_coverage(inst));
    }
    d
}

pub fn validate_ess(e: &EssSpec) -> Vec<String> {
    let mut d = Vec::new();
    if !(0.0 <= e.p_min_mw && e.p_min_mw <= e.p_ch_max_mw.min(e.p_dch_max_mw)) {
        d.push("ESS power bounds must satisfy 0 ≤ p_min ≤ p_max".into());
    }
    if !(e.e_min_mwh <= e.e_initial_mwh && e.e_initial_mwh <= e.e_max_mwh) {
        d.push("ESS energy must satisfy e_min ≤ e_initial ≤ e_max".into());
    }
    if !(e.mu_ch > 0.0 && e.mu_ch <= 1.0 && e.mu_dch > 0.0 && e.mu_dch <= 1.0) {
        d.push("ESS efficiencies must lie in (0, 1]".into());
    }
    if !(e.mu_ch * e.mu_dch < 1.0) {
        d.push("ESS round-trip efficiency must be strictly below 1".into());
    }
    d
}

/// Substations must be able to cover the worst-case demand in every
/// interval, since load shedding is not modelled.
fn load_coverage(inst: &NetworkInstance) -> Vec<String> {
    let mut d = Vec::new();
    let u = &inst.uncertainty;
    let p_cap: f64 = inst
        .nodes
        .iter()
        .filter_map(|n| n.substation.as_ref())
        .map(|s| s.p_max_mw)
        .sum();
    let q_cap: f64 = inst
        .nodes
        .iter()
        .filter_map(|n| n.substation.as_ref())
        .map(|s| s.q_max_mvar)
        .sum();
    let ev_share: f64 = inst.pses.iter().map(|c| c.ev_share).sum();
    for t in 0..inst.horizon.intervals {
        let mut p: f64 = inst.nodes.iter().map(|n| n.p_load_mw[t]).sum();
        p += u.p_dev_mw.iter().map(|dev| dev.up[t]).sum::<f64>();
        let ev = u.ev_scenarios_mw.iter().map(|s| s[t]).fold(0.0, f64::max);
        p += ev_share * ev;
        let mut q: f64 = inst.nodes.iter().map(|n| n.q_load_mvar[t]).sum();
        q += u.q_dev_mvar.iter().map(|dev| dev.up[t]).sum::<f64>();
        if p > p_cap + 1e-9 {
            d.push(format!(
                "interval {t}: worst-case active demand {p:.4} MW exceeds substation capacity {p_cap:.4} MW"
            ));
        }
        if q > q_cap + 1e-9 {
            d.push(format!(
                "interval {t}: worst-case reactive demand {q:.4} MVar exceeds substation capacity {q_cap:.4} MVar"
            ));
        }
    }
    d
}

pub fn ensure_valid(inst: &NetworkInstance) -> Result<()> {
    let d = validate_instance(inst);
    if d.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(d))
    }
}

#[cfg(test)]
mod tests;
