//! EV fleet: cost-minimizing scheduled charging, the max-merge with random
//! charging, and truncated-normal sampling of the fleet demand level.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatNormal};

use crate::error::{Error, Result};
use crate::milp::{solve_lp, Backend, MixedIntegerProgram, Relation, Sense, SolveOptions, SolveStatus};

/// Per-interval perturbation that makes earlier charging strictly cheaper
/// among equal-cost schedules.
const EARLY_TIEBREAK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvSpec {
    /// Intervals in which the vehicle is plugged in.
    pub window: Vec<usize>,
    pub e_initial_mwh: f64,
    pub e_target_mwh: f64,
    pub e_capacity_mwh: f64,
    pub p_max_mw: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvScenario {
    pub evs: Vec<EvSpec>,
    /// Uncontrolled charging profile of the cluster.
    pub random_mw: Vec<f64>,
    pub mu: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvFleetModel {
    pub tariff_1e4_cny_per_mwh: Vec<f64>,
    pub dt_hours: f64,
    pub sigma2: f64,
    pub scenarios: Vec<EvScenario>,
}

impl EvFleetModel {
    pub fn intervals(&self) -> usize {
        self.tariff_1e4_cny_per_mwh.len()
    }

    /// Realized cluster profile of every scenario.
    pub fn scenario_profiles(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.scenarios.len())
            .map(|s| {
                let sch = schedule_ev_charging(self, s)?;
                realize_ev_demand(&sch, &self.scenarios[s].random_mw)
            })
            .collect()
    }
}

/// Aggregated charging schedule of scenario `s` that minimizes the
/// fleet's energy bill while meeting every vehicle's target.
pub fn schedule_ev_charging(fleet: &EvFleetModel, s: usize) -> Result<Vec<f64>> {
    let t_len = fleet.intervals();
    let scen = fleet
        .scenarios
        .get(s)
        .ok_or_else(|| Error::Domain(format!("scenario {s} out of range")))?;
    let dt = fleet.dt_hours;
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let mut cols = Vec::new();
    for (u, ev) in scen.evs.iter().enumerate() {
        if ev.window.iter().any(|&t| t >= t_len) {
            return Err(Error::Domain(format!("EV {u}: window exceeds horizon")));
        }
        if !(ev.e_initial_mwh <= ev.e_target_mwh && ev.e_target_mwh <= ev.e_capacity_mwh) {
            return Err(Error::Domain(format!("EV {u}: inconsistent energy levels")));
        }
        let need = ev.e_target_mwh - ev.e_initial_mwh;
        let deliverable = ev.window.len() as f64 * ev.p_max_mw * dt;
        if deliverable + 1e-12 < need {
            return Err(Error::Infeasible(format!(
                "EV {u} needs {need} MWh but its window delivers at most {deliverable} MWh"
            )));
        }
        let mut window = ev.window.clone();
        window.sort_unstable();
        window.dedup();
        let vars: Vec<_> = window
            .iter()
            .map(|&t| {
                let v = mip.add_var(format!("pev[{u},{t}]"), 0.0, ev.p_max_mw);
                mip.set_cost(v, fleet.tariff_1e4_cny_per_mwh[t] * dt + EARLY_TIEBREAK * t as f64);
                (t, v)
            })
            .collect();
        // stored energy never exceeds capacity
        for k in 0..vars.len() {
            mip.add_row(
                format!("soc[{u},{}]", vars[k].0),
                vars[..=k].iter().map(|&(_, v)| (v, dt)).collect(),
                Relation::Le,
                ev.e_capacity_mwh - ev.e_initial_mwh,
            );
        }
        mip.add_row(
            format!("target[{u}]"),
            vars.iter().map(|&(_, v)| (v, dt)).collect(),
            Relation::Ge,
            need,
        );
        cols.extend(vars);
    }
    let mut profile = vec![0.0; t_len];
    if cols.is_empty() {
        return Ok(profile);
    }
    let sol = solve_lp(&mip, &SolveOptions::with_backend(Backend::Highs))?;
    if sol.status == SolveStatus::Infeasible {
        return Err(Error::Infeasible(format!("EV charging targets in scenario {s}")));
    }
    let sol = sol.require("scheduling EV charging")?;
    for (t, v) in cols {
        profile[t] += sol.value(v);
    }
    Ok(profile)
}

/// Element-wise maximum of the scheduled and random profiles.
pub fn realize_ev_demand(scheduled: &[f64], random: &[f64]) -> Result<Vec<f64>> {
    if scheduled.len() != random.len() {
        return Err(Error::DimensionMismatch(format!(
            "scheduled profile has {} intervals, random {}",
            scheduled.len(),
            random.len()
        )));
    }
    Ok(scheduled.iter().zip(random).map(|(a, b)| a.max(*b)).collect())
}

/// Parameters `(mean, σ, lower, upper)` of the fleet-level truncated normal
/// under scenario weights `pi`.
pub fn fleet_distribution(fleet: &EvFleetModel, pi: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if pi.len() != fleet.scenarios.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} scenarios",
            pi.len(),
            fleet.scenarios.len()
        )));
    }
    let w = |f: fn(&EvScenario) -> f64| -> f64 {
        fleet.scenarios.iter().zip(pi).map(|(s, p)| p * f(s)).sum()
    };
    let mean = w(|s| s.mu);
    let lo = w(|s| s.mu_min);
    let hi = w(|s| s.mu_max);
    if lo > hi {
        return Err(Error::Domain("truncation bounds inverted".into()));
    }
    if !(fleet.sigma2 >= 0.0) {
        return Err(Error::Domain("variance must be nonnegative".into()));
    }
    Ok((mean, fleet.sigma2.sqrt(), lo, hi))
}

/// Mean of `N(mu, σ²)` truncated to `[a, b]`.
pub fn truncated_normal_mean(mu: f64, sigma: f64, a: f64, b: f64) -> f64 {
    if sigma == 0.0 || a == b {
        return mu.clamp(a, b);
    }
    let n = StatNormal::new(0.0, 1.0).unwrap();
    let (alpha, beta) = ((a - mu) / sigma, (b - mu) / sigma);
    let z = n.cdf(beta) - n.cdf(alpha);
    mu + sigma * (n.pdf(alpha) - n.pdf(beta)) / z
}

/// One draw of the fleet demand level by rejection from the untruncated normal.
pub fn sample_fleet_demand<R: Rng>(fleet: &EvFleetModel, pi: &[f64], rng: &mut R) -> Result<f64> {
    let (mean, sigma, lo, hi) = fleet_distribution(fleet, pi)?;
    if sigma == 0.0 || lo == hi {
        return Ok(mean.clamp(lo, hi));
    }
    let std = StatNormal::new(0.0, 1.0).unwrap();
    let mass = std.cdf((hi - mean) / sigma) - std.cdf((lo - mean) / sigma);
    if mass < 1e-6 {
        return Err(Error::RejectionLimit(mass));
    }
    let normal = Normal::new(mean, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    loop {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return Ok(x);
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioRecord {
    scenario_id: usize,
    t: usize,
    ev_power_mw: f64,
}

/// Writes `scenario_id, t, ev_power_mw` rows.
pub fn write_scenario_csv<W: Write>(profiles: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (s, prof) in profiles.iter().enumerate() {
        for (t, &p) in prof.iter().enumerate() {
            w.serialize(ScenarioRecord {
                scenario_id: s,
                t,
                ev_power_mw: p,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a scenario CSV into per-scenario profiles; every scenario must
/// define every interval exactly once.
pub fn read_scenario_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<ScenarioRecord> = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    let s_len = rows.iter().map(|r| r.scenario_id + 1).max().unwrap_or(0);
    let t_len = rows.iter().map(|r| r.t + 1).max().unwrap_or(0);
    let mut out = vec![vec![f64::NAN; t_len]; s_len];
    for r in rows {
        if !out[r.scenario_id][r.t].is_nan() {
            return Err(Error::Domain(format!(
                "scenario {} interval {} defined twice",
                r.scenario_id, r.t
            )));
        }
        out[r.scenario_id][r.t] = r.ev_power_mw;
    }
    if out.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::Domain("scenario CSV leaves some (scenario, interval) undefined".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn one_ev(tariff: Vec<f64>, window: Vec<usize>, need: f64) -> EvFleetModel {
        EvFleetModel {
            dt_hours: 1.0,
            sigma2: 0.12,
            scenarios: vec![EvScenario {
                evs: vec![EvSpec {
                    window,
                    e_initial_mwh: 0.0,
                    e_target_mwh: need,
                    e_capacity_mwh: 4.0,
                    p_max_mw: 1.0,
                }],
                random_mw: vec![0.0; tariff.len()],
                mu: 1.0,
                mu_min: 0.5,
                mu_max: 1.5,
            }],
            tariff_1e4_cny_per_mwh: tariff,
        }
    }

    #[test]
    fn flat_tariff_charges_earliest() {
        let f = one_ev(vec![0.1; 4], vec![0, 1, 2, 3], 2.0);
        let p = schedule_ev_charging(&f, 0).unwrap();
        for (a, b) in p.iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn tou_tariff_picks_cheapest_pair() {
        let tariff = vec![0.111, 0.025, 0.065, 0.025];
        let f = one_ev(tariff.clone(), vec![0, 1, 2, 3], 2.0);
        let p = schedule_ev_charging(&f, 0).unwrap();
        // enumerate all pairs of full-power intervals
        let mut best = (f64::INFINITY, (0, 0));
        for a in 0..4 {
            for b in a + 1..4 {
                let c = tariff[a] + tariff[b];
                if c < best.0 {
                    best = (c, (a, b));
                }
            }
        }
        assert_eq!(best.1, (1, 3));
        for (t, v) in p.iter().enumerate() {
            let expected = if t == 1 || t == 3 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn impossible_target_is_infeasible() {
        let f = one_ev(vec![0.1; 4], vec![0, 1], 3.0);
        assert!(matches!(schedule_ev_charging(&f, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn max_merge_examples() {
        assert_eq!(realize_ev_demand(&[0.0], &[0.0]).unwrap(), vec![0.0]);
        assert_eq!(realize_ev_demand(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(realize_ev_demand(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), vec![1.0, 3.0]);
        assert!(realize_ev_demand(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn degenerate_sampling_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = one_ev(vec![0.1; 2], vec![0], 0.5);
        f.sigma2 = 0.0;
        f.scenarios[0].mu = 2.0;
        assert_eq!(sample_fleet_demand(&f, &[1.0], &mut rng).unwrap(), 1.5);
        f.sigma2 = 0.12;
        f.scenarios[0].mu_min = 0.7;
        f.scenarios[0].mu_max = 0.7;
        assert_eq!(sample_fleet_demand(&f, &[1.0], &mut rng).unwrap(), 0.7);
    }

    #[test]
    fn negligible_acceptance_mass_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = one_ev(vec![0.1; 2], vec![0], 0.5);
        f.sigma2 = 0.01;
        f.scenarios[0].mu = 0.0;
        f.scenarios[0].mu_min = 5.0;
        f.scenarios[0].mu_max = 6.0;
        assert!(matches!(
            sample_fleet_demand(&f, &[1.0], &mut rng),
            Err(Error::RejectionLimit(_))
        ));
    }

    #[test]
    fn empirical_mean_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = one_ev(vec![0.1; 2], vec![0], 0.5);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_fleet_demand(&f, &[1.0], &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let sigma = 0.12f64.sqrt();
        let exact = truncated_normal_mean(1.0, sigma, 0.5, 1.5);
        assert!((mean - exact).abs() < 3.0 * sigma / (n as f64).sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn scenario_csv_round_trip() {
        let profiles = vec![vec![0.5, 1.0, 0.0], vec![0.25, 0.0, 2.0]];
        let mut buf = Vec::new();
        write_scenario_csv(&profiles, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scenario_id,t,ev_power_mw"));
        assert_eq!(read_scenario_csv(&buf[..]).unwrap(), profiles);
    }
}
