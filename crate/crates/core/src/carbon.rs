//! Third layer: carbon-emission flow over the operated network and the
//! split of procured energy between the thermal and tidal units.
//!
//! Substations inject procured energy at the generator intensity `e^G`.
//! A node whose local resources exceed its demand (reverse injection) acts
//! as a zero-intensity source. Branches carry the intensity of their
//! sending node.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::NetworkInstance;
use crate::operations::OperatingPoint;

const FLOW_TOL: f64 = 1e-12;

/// How the generator intensity is averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityMode {
    /// One intensity for the whole horizon: energy-weighted over all intervals.
    #[default]
    Horizon,
    /// One intensity per interval.
    PerInterval,
}

impl std::str::FromStr for IntensityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horizon" => Ok(IntensityMode::Horizon),
            "per-interval" | "per_interval" => Ok(IntensityMode::PerInterval),
            _ => Err(Error::Domain(format!("unknown intensity mode `{s}`"))),
        }
    }
}

/// Nodal demand seen by the grid, `[node][t]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeLoads {
    pub load: Vec<Vec<f64>>,
    /// Surplus of local resources over demand, exported into the network.
    pub reverse: Vec<Vec<f64>>,
}

/// Grid demand plus EV charging and storage charging, minus PV and storage
/// discharge, split into its positive part and reverse injection.
pub fn node_loads(op: &OperatingPoint, inst: &NetworkInstance) -> NodeLoads {
    let t_len = inst.num_intervals();
    let mut out = NodeLoads {
        load: vec![vec![0.0; t_len]; inst.num_nodes()],
        reverse: vec![vec![0.0; t_len]; inst.num_nodes()],
    };
    for i in 0..inst.num_nodes() {
        for t in 0..t_len {
            let mut net = op.p_grid.get(i).map_or(0.0, |r| r[t]);
            for (k, c) in inst.pses.iter().enumerate() {
                if c.node == i {
                    net += op.ev[k][t] + op.ess_ch[k][t] - op.pv[k][t] - op.ess_dch[k][t];
                }
            }
            if net >= 0.0 {
                out.load[i][t] = net;
            } else {
                out.reverse[i][t] = -net;
            }
        }
    }
    out
}

/// Energy bought from the units per interval: the positive part of the
/// substation injections.
pub fn procured_load(op: &OperatingPoint) -> Vec<f64> {
    let t_len = op.p_sub.first().map_or(0, Vec::len);
    (0..t_len)
        .map(|t| op.p_sub.iter().map(|r| r[t].max(0.0)).sum())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CefResult {
    /// Nodal intensity `[node][t]` in t/MWh.
    pub intensity: Vec<Vec<f64>>,
    /// Branch carbon density `[line][t]`, the sending node's intensity.
    pub branch_density: Vec<Vec<f64>>,
    pub generator_intensity: Vec<f64>,
    pub loads: NodeLoads,
    /// Total nodal flux (inflow plus injections), the diagonal of `P_I`.
    pub flux: Vec<Vec<f64>>,
}

/// Intensities of interval `t` for substation intensity `e_g`.
fn interval_intensity(
    inst: &NetworkInstance,
    op: &OperatingPoint,
    loads: &NodeLoads,
    t: usize,
    e_g: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = inst.num_nodes();
    let subs = inst.substation_nodes();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut flux = vec![0.0; n];
    for (l, line) in inst.lines.iter().enumerate() {
        let p = op.p_line[l][t];
        if p.abs() <= FLOW_TOL {
            continue;
        }
        let (from, to) = if p > 0.0 { (line.from, line.to) } else { (line.to, line.from) };
        flux[to] += p.abs();
        m[(to, from)] -= p.abs();
    }
    for (s, &i) in subs.iter().enumerate() {
        let inj = op.p_sub[s][t];
        if inj > 0.0 {
            flux[i] += inj;
            rhs[i] += inj * e_g;
        }
    }
    for i in 0..n {
        flux[i] += loads.reverse[i][t];
        if flux[i] <= FLOW_TOL {
            if loads.load[i][t] > 1e-9 {
                return Err(Error::SingularSystem { node: i, t });
            }
            m[(i, i)] = 1.0;
            rhs[i] = 0.0;
            for j in 0..n {
                if j != i {
                    m[(i, j)] = 0.0;
                }
            }
        } else {
            m[(i, i)] += flux[i];
        }
    }
    let e = m.lu().solve(&rhs).ok_or(Error::SingularSystem { node: 0, t })?;
    Ok((e.iter().map(|v| v.max(0.0)).collect(), flux))
}

/// Generator intensity per interval for a dispatch.
pub fn generator_intensity(inst: &NetworkInstance, p_tg: &[f64], p_tc: &[f64], mode: IntensityMode) -> Vec<f64> {
    let u = &inst.units;
    let t_len = p_tg.len();
    let emitted = |t: usize| u.thermal.intensity_t_per_mwh[t] * p_tg[t] + u.tidal.intensity_t_per_mwh[t] * p_tc[t];
    let ratio = |num: f64, den: f64| if den > FLOW_TOL { num / den } else { 0.0 };
    match mode {
        IntensityMode::Horizon => {
            let num: f64 = (0..t_len).map(emitted).sum();
            let den: f64 = (0..t_len).map(|t| p_tg[t] + p_tc[t]).sum();
            vec![ratio(num, den); t_len]
        }
        IntensityMode::PerInterval => (0..t_len).map(|t| ratio(emitted(t), p_tg[t] + p_tc[t])).collect(),
    }
}

/// Carbon-emission flow of an operating point for given generator intensities.
pub fn compute_cef(op: &OperatingPoint, generator_intensity: &[f64], inst: &NetworkInstance) -> Result<CefResult> {
    let t_len = inst.num_intervals();
    if generator_intensity.len() != t_len {
        return Err(Error::DimensionMismatch(format!(
            "{} generator intensities for {t_len} intervals",
            generator_intensity.len()
        )));
    }
    let loads = node_loads(op, inst);
    let n = inst.num_nodes();
    let mut intensity = vec![vec![0.0; t_len]; n];
    let mut flux = vec![vec![0.0; t_len]; n];
    for t in 0..t_len {
        let (e, f) = interval_intensity(inst, op, &loads, t, generator_intensity[t])?;
        for i in 0..n {
            intensity[i][t] = e[i];
            flux[i][t] = f[i];
        }
    }
    let branch_density = inst
        .lines
        .iter()
        .enumerate()
        .map(|(l, line)| {
            (0..t_len)
                .map(|t| {
                    let p = op.p_line[l][t];
                    if p > FLOW_TOL {
                        intensity[line.from][t]
                    } else if p < -FLOW_TOL {
                        intensity[line.to][t]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(CefResult {
        intensity,
        branch_density,
        generator_intensity: generator_intensity.to_vec(),
        loads,
        flux,
    })
}

fn carbon_price(inst: &NetworkInstance, node: usize) -> f64 {
    inst.area_of(node).map_or(0.0, |k| inst.areas[k].carbon_price_1e4_cny_per_t)
}

/// Annual carbon cost `η·Σ_t Σ_i c_k(i)·e_{i,t}·P^Load_{i,t}`.
pub fn carbon_cost(cef: &CefResult, inst: &NetworkInstance) -> f64 {
    let eta = inst.horizon.eta_grid_h_per_yr;
    let mut total = 0.0;
    for i in 0..inst.num_nodes() {
        let c = carbon_price(inst, i);
        for t in 0..inst.num_intervals() {
            total += c * cef.intensity[i][t] * cef.loads.load[i][t];
        }
    }
    eta * total
}

/// Annual procurement cost `η·Σ_t (c^TG·P^TG + c^TC·P^TC)`.
pub fn procurement_cost(dispatch: &DispatchPlan, inst: &NetworkInstance) -> f64 {
    let u = &inst.units;
    let eta = inst.horizon.eta_grid_h_per_yr;
    (0..dispatch.p_tg.len())
        .map(|t| u.thermal.price_1e4_cny_per_mwh[t] * dispatch.p_tg[t] + u.tidal.price_1e4_cny_per_mwh[t] * dispatch.p_tc[t])
        .sum::<f64>()
        * eta
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispatchPlan {
    pub p_tg: Vec<f64>,
    pub p_tc: Vec<f64>,
    pub generator_intensity: Vec<f64>,
    pub carbon_cost: f64,
    pub procurement_cost: f64,
    pub mode: IntensityMode,
    /// Step of the tidal-share grid, when the plan came from a grid search.
    pub grid_resolution: Option<f64>,
}

impl DispatchPlan {
    pub fn total_cost(&self) -> f64 {
        self.carbon_cost + self.procurement_cost
    }
}

fn check_capacity(inst: &NetworkInstance, demand: &[f64]) -> Result<()> {
    let u = &inst.units;
    for (t, &d) in demand.iter().enumerate() {
        if d > u.thermal.cap_mw[t] + u.tidal.cap_mw[t] + 1e-9 {
            return Err(Error::InfeasibleLoad(t));
        }
    }
    Ok(())
}

/// Costs and intensities of a given dispatch.
pub fn evaluate_dispatch(
    op: &OperatingPoint,
    inst: &NetworkInstance,
    p_tg: Vec<f64>,
    p_tc: Vec<f64>,
    mode: IntensityMode,
) -> Result<(DispatchPlan, CefResult)> {
    let e_g = generator_intensity(inst, &p_tg, &p_tc, mode);
    let cef = compute_cef(op, &e_g, inst)?;
    let mut plan = DispatchPlan {
        p_tg,
        p_tc,
        generator_intensity: e_g,
        carbon_cost: carbon_cost(&cef, inst),
        procurement_cost: 0.0,
        mode,
        grid_resolution: None,
    };
    plan.procurement_cost = procurement_cost(&plan, inst);
    Ok((plan, cef))
}

/// Cost-minimal split of the procured energy.
///
/// Nodal intensities are `e^G` times the substation-origin share of each
/// node's power, so the carbon cost is `e^G·A` with `A` fixed by the flows.
/// Since `P^TG + P^TC` equals the procured load in every interval, `e^G` is
/// linear in the dispatch in both modes and each interval is filled in
/// merit order.
pub fn optimize_procurement(op: &OperatingPoint, inst: &NetworkInstance, mode: IntensityMode) -> Result<(DispatchPlan, CefResult)> {
    let demand = procured_load(op);
    check_capacity(inst, &demand)?;
    let t_len = demand.len();
    let eta = inst.horizon.eta_grid_h_per_yr;
    let unit = compute_cef(op, &vec![1.0; t_len], inst)?;
    let weight: Vec<f64> = (0..t_len)
        .map(|t| {
            eta * (0..inst.num_nodes())
                .map(|i| carbon_price(inst, i) * unit.intensity[i][t] * unit.loads.load[i][t])
                .sum::<f64>()
        })
        .collect();
    let ratio = |num: f64, den: f64| if den > FLOW_TOL { num / den } else { 0.0 };
    let kappa: Vec<f64> = match mode {
        IntensityMode::Horizon => {
            let k = ratio(weight.iter().sum(), demand.iter().sum());
            vec![k; t_len]
        }
        IntensityMode::PerInterval => (0..t_len).map(|t| ratio(weight[t], demand[t])).collect(),
    };
    let u = &inst.units;
    let mut p_tg = vec![0.0; t_len];
    let mut p_tc = vec![0.0; t_len];
    for t in 0..t_len {
        let m_tg = eta * u.thermal.price_1e4_cny_per_mwh[t] + kappa[t] * u.thermal.intensity_t_per_mwh[t];
        let m_tc = eta * u.tidal.price_1e4_cny_per_mwh[t] + kappa[t] * u.tidal.intensity_t_per_mwh[t];
        if m_tc <= m_tg {
            p_tc[t] = demand[t].min(u.tidal.cap_mw[t]);
            p_tg[t] = demand[t] - p_tc[t];
        } else {
            p_tg[t] = demand[t].min(u.thermal.cap_mw[t]);
            p_tc[t] = demand[t] - p_tg[t];
        }
    }
    evaluate_dispatch(op, inst, p_tg, p_tc, mode)
}

/// Grid search over the tidal share of the procured energy. In horizon mode
/// one share covers the whole horizon and is spread over the intervals by
/// price advantage; in per-interval mode every interval gets its own grid.
pub fn optimize_procurement_grid(
    op: &OperatingPoint,
    inst: &NetworkInstance,
    mode: IntensityMode,
    points: usize,
) -> Result<(DispatchPlan, CefResult)> {
    if points < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    let demand = procured_load(op);
    check_capacity(inst, &demand)?;
    let t_len = demand.len();
    let u = &inst.units;
    let lo: Vec<f64> = (0..t_len).map(|t| (demand[t] - u.thermal.cap_mw[t]).max(0.0)).collect();
    let hi: Vec<f64> = (0..t_len).map(|t| demand[t].min(u.tidal.cap_mw[t])).collect();
    let total: f64 = demand.iter().sum();
    let steps = (points - 1) as f64;
    match mode {
        IntensityMode::Horizon => {
            let (e_lo, e_hi): (f64, f64) = (lo.iter().sum(), hi.iter().sum());
            let mut order: Vec<usize> = (0..t_len).collect();
            order.sort_by(|&a, &b| {
                let adv = |t: usize| u.thermal.price_1e4_cny_per_mwh[t] - u.tidal.price_1e4_cny_per_mwh[t];
                adv(b).total_cmp(&adv(a)).then(a.cmp(&b))
            });
            let mut best: Option<(DispatchPlan, CefResult)> = None;
            for j in 0..points {
                let mut left = (e_hi - e_lo) * j as f64 / steps;
                let mut p_tc = lo.clone();
                for &t in &order {
                    let add = left.min(hi[t] - lo[t]);
                    p_tc[t] += add;
                    left -= add;
                }
                let p_tg: Vec<f64> = (0..t_len).map(|t| demand[t] - p_tc[t]).collect();
                let cand = evaluate_dispatch(op, inst, p_tg, p_tc, mode)?;
                if best.as_ref().map_or(true, |b| cand.0.total_cost() < b.0.total_cost()) {
                    best = Some(cand);
                }
            }
            let mut best = best.unwrap();
            best.0.grid_resolution = Some(if total > 0.0 { (e_hi - e_lo) / steps / total } else { 0.0 });
            Ok(best)
        }
        IntensityMode::PerInterval => {
            let loads = node_loads(op, inst);
            let eta = inst.horizon.eta_grid_h_per_yr;
            let mut p_tc = vec![0.0; t_len];
            for t in 0..t_len {
                let mut best = (f64::INFINITY, lo[t]);
                for j in 0..points {
                    let tc = lo[t] + (hi[t] - lo[t]) * j as f64 / steps;
                    let tg = demand[t] - tc;
                    let e_g = if demand[t] > FLOW_TOL {
                        (u.thermal.intensity_t_per_mwh[t] * tg + u.tidal.intensity_t_per_mwh[t] * tc) / demand[t]
                    } else {
                        0.0
                    };
                    let (e, _) = interval_intensity(inst, op, &loads, t, e_g)?;
                    let carbon: f64 = (0..inst.num_nodes())
                        .map(|i| carbon_price(inst, i) * e[i] * loads.load[i][t])
                        .sum();
                    let cost = eta * (carbon + u.thermal.price_1e4_cny_per_mwh[t] * tg + u.tidal.price_1e4_cny_per_mwh[t] * tc);
                    if cost < best.0 {
                        best = (cost, tc);
                    }
                }
                p_tc[t] = best.1;
            }
            let p_tg: Vec<f64> = (0..t_len).map(|t| demand[t] - p_tc[t]).collect();
            let mut out = evaluate_dispatch(op, inst, p_tg, p_tc, mode)?;
            let widest = (0..t_len).map(|t| if demand[t] > 0.0 { (hi[t] - lo[t]) / demand[t] } else { 0.0 }).fold(0.0, f64::max);
            out.0.grid_resolution = Some(widest / steps);
            Ok(out)
        }
    }
}
