//! Seeded property sweeps that pit each fast path against its oracle.
//!
//! Every sweep draws its instances from one ChaCha stream per suite, so a
//! `(seed, instances)` pair reproduces the same matrix. The sweeps run on
//! separate threads and are collected in a fixed order.

#[cfg(test)]
mod tests;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::carbon::{optimize_procurement, IntensityMode};
use crate::error::{Error, Result};
use crate::iccg::{ccg_solve, iccg_solve, IccgParams, PlanningProblem};
use crate::instance::{graph_instance, random_instance, validate_ess, NetworkInstance, PlanningDecision, RandomInstanceSpec};
use crate::milp::SolveOptions;
use crate::operations::{canonicalize_ess, default_solve_options, solve_operation, OpsConfig};
use crate::subproblem::{oracle_subproblem_bruteforce, scenario_costs_at, solve_subproblem, SubproblemConfig};
use crate::topology::{enumerate_radial_topologies, milp_feasible_topologies};
use crate::uncertainty::{worst_case_greedy, worst_case_probabilities, worst_case_probabilities_lp, AmbiguitySet, BoxSet, NodalData};

pub const SUITES: [&str; 6] = ["ess", "topology", "subproblem", "ambiguity", "cef", "iccg"];

pub const ESS_TOL: f64 = 1e-6;
pub const SUBPROBLEM_TOL: f64 = 1e-5;
pub const REPLAY_TOL: f64 = 1e-6;
pub const AMBIGUITY_TOL: f64 = 1e-8;
pub const CEF_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    /// Cases with nothing to compare, e.g. no operable plan.
    pub skipped: usize,
    pub max_error: f64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), ..Default::default() }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, label: String, outcome: Result<Check>) {
        self.cases += 1;
        match outcome {
            Ok(Check::Skip) => self.skipped += 1,
            Ok(Check::Error(e, limit)) => {
                self.max_error = self.max_error.max(e);
                if e <= limit {
                    self.passed += 1;
                } else {
                    self.failures.push(format!("{label}: error {e:.3e} above {limit:.0e}"));
                }
            }
            Ok(Check::Fail(msg)) => self.failures.push(format!("{label}: {msg}")),
            Err(e) => self.failures.push(format!("{label}: {e}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub instances: usize,
    pub all_pass: bool,
    pub suites: Vec<SuiteResult>,
}

/// Outcome of one comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// Observed error and its limit.
    Error(f64, f64),
    Fail(String),
    Skip,
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn suite_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let salt = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

/// Runs every sweep on `instances` draws per suite.
pub fn run_property_suites(seed: u64, instances: usize) -> Result<SuiteReport> {
    let results: Vec<Result<SuiteResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = SUITES.iter().map(|name| scope.spawn(move || run_suite(name, seed, instances))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let suites = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        seed,
        instances,
        all_pass: suites.iter().all(SuiteResult::ok),
        suites,
    })
}

pub fn run_suite(name: &str, seed: u64, instances: usize) -> Result<SuiteResult> {
    let mut rng = suite_rng(seed, name);
    let opts = default_solve_options();
    let mut out = SuiteResult::new(name);
    match name {
        "ess" => {
            for k in 0..instances {
                let spec = RandomInstanceSpec {
                    nodes: rng.gen_range(3..=8),
                    intervals: rng.gen_range(2..=6),
                    scenarios: 1,
                    stations: rng.gen_range(1..=3),
                    extra_lines: rng.gen_range(0..=2),
                    box_dims: 0,
                };
                let s = rng.gen();
                out.record(format!("instance {k} (seed {s})"), ess_exactness(&random_instance(s, spec), &opts));
            }
        }
        "topology" => {
            out.record("K3".into(), topology_sets_agree(&complete_graph(3), &opts));
            out.record("K4".into(), topology_sets_agree(&complete_graph(4), &opts));
            for k in 0..instances {
                let inst = random_graph(&mut rng);
                out.record(format!("graph {k} ({} lines)", inst.num_lines()), topology_sets_agree(&inst, &opts));
            }
        }
        "subproblem" => {
            let cfg = OpsConfig::default();
            for k in 0..instances {
                let spec = RandomInstanceSpec {
                    nodes: rng.gen_range(3..=5),
                    intervals: rng.gen_range(2..=3),
                    scenarios: rng.gen_range(1..=3),
                    stations: 2,
                    extra_lines: rng.gen_range(0..=2),
                    box_dims: rng.gen_range(1..=4),
                };
                let s = rng.gen();
                out.record(format!("instance {k} (seed {s})"), subproblem_matches_corners(&random_instance(s, spec), &cfg, &opts));
            }
        }
        "ambiguity" => {
            for k in 0..instances * 20 {
                out.record(format!("draw {k}"), ambiguity_draw(&mut rng));
            }
        }
        "cef" => {
            for k in 0..instances {
                let spec = RandomInstanceSpec {
                    nodes: rng.gen_range(3..=8),
                    intervals: rng.gen_range(1..=4),
                    scenarios: 1,
                    stations: rng.gen_range(1..=3),
                    extra_lines: rng.gen_range(0..=2),
                    box_dims: 0,
                };
                let s = rng.gen();
                out.record(format!("instance {k} (seed {s})"), cef_balance(&random_instance(s, spec), &opts));
            }
        }
        "iccg" => {
            let params = IccgParams::default();
            for k in 0..instances {
                let spec = RandomInstanceSpec { nodes: 4, intervals: 2, scenarios: 2, stations: 2, extra_lines: 2, box_dims: 2 };
                let s = rng.gen();
                out.record(format!("instance {k} (seed {s})"), loops_agree(&random_instance(s, spec), &params, &opts));
            }
        }
        _ => return Err(Error::Domain(format!("unknown suite `{name}`"))),
    }
    Ok(out)
}

fn first_radial_plan(inst: &NetworkInstance) -> Result<PlanningDecision> {
    let z = enumerate_radial_topologies(inst, 100_000)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Infeasible("no radial topology".into()))?;
    PlanningDecision::from_build(inst, z, vec![true; inst.pses.len()])
}

/// Relaxed and binary storage models reach the same optimum, and the
/// canonical relaxed point never charges and discharges together.
pub fn ess_exactness(inst: &NetworkInstance, opts: &SolveOptions) -> Result<Check> {
    for c in &inst.pses {
        if let Some(e) = &c.ess {
            let mut diags = validate_ess(e);
            if e.mu_ch * e.mu_dch >= 1.0 {
                diags.push("round-trip efficiency must be below one".into());
            }
            if !diags.is_empty() {
                return Ok(Check::Fail(format!("station at node {}: {}", c.node, diags.join("; "))));
            }
        }
    }
    let plan = first_radial_plan(inst)?;
    let data = NodalData::realize(inst, &BoxSet::from_instance(inst), &BoxSet::from_instance(inst).nominal())?;
    let ev = &inst.uncertainty.ev_scenarios_mw[0];
    let relaxed = OpsConfig::default();
    let binary = OpsConfig { relaxed_ess: false, ..relaxed };
    let a = solve_operation(inst, &plan, &data, ev, &relaxed, opts)?;
    let b = solve_operation(inst, &plan, &data, ev, &binary, opts)?;
    match (a, b) {
        (None, None) => Ok(Check::Skip),
        (Some(a), Some(b)) => {
            let canon = canonicalize_ess(inst, &plan, &data, ev, &relaxed, a.cost, opts)?;
            let simultaneous = canon
                .gamma_ch
                .iter()
                .flatten()
                .zip(canon.gamma_dch.iter().flatten())
                .map(|(c, d)| c * d)
                .fold(0.0, f64::max);
            if simultaneous > ESS_TOL {
                return Ok(Check::Fail(format!("γch·γdch = {simultaneous:.3e}")));
            }
            Ok(Check::Error((a.cost - b.cost).abs() / a.cost.abs().max(1.0), ESS_TOL))
        }
        (a, b) => Ok(Check::Fail(format!("relaxed feasible {} but binary feasible {}", a.is_some(), b.is_some()))),
    }
}

fn complete_graph(n: usize) -> NetworkInstance {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    graph_instance(n, &edges, &[0])
}

fn random_graph(rng: &mut ChaCha8Rng) -> NetworkInstance {
    let n = rng.gen_range(3..=6);
    let mut edges: BTreeSet<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let extra = rng.gen_range(0..=4);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let subs: Vec<usize> = if n > 4 && rng.gen_bool(0.3) { vec![0, n - 1] } else { vec![0] };
    let edges: Vec<(usize, usize)> = edges.into_iter().take(20).collect();
    graph_instance(n, &edges, &subs)
}

/// The radiality block admits exactly the spanning forests found by brute force.
pub fn topology_sets_agree(inst: &NetworkInstance, opts: &SolveOptions) -> Result<Check> {
    let brute: BTreeSet<Vec<bool>> = enumerate_radial_topologies(inst, 100_000)?.into_iter().collect();
    let milp: BTreeSet<Vec<bool>> = milp_feasible_topologies(inst, 100_000, opts)?.into_iter().collect();
    if brute == milp {
        Ok(Check::Error(0.0, 0.0))
    } else {
        Ok(Check::Fail(format!(
            "{} brute-force trees, {} MILP-feasible, {} in common",
            brute.len(),
            milp.len(),
            brute.intersection(&milp).count()
        )))
    }
}

fn operable_plan(inst: &NetworkInstance, cfg: &OpsConfig, opts: &SolveOptions) -> Result<Option<PlanningDecision>> {
    let b = BoxSet::from_instance(inst);
    let k = inst.pses.len();
    for z in enumerate_radial_topologies(inst, 100_000)? {
        for mask in 0..1u32 << k {
            let y = (0..k).map(|j| mask >> j & 1 == 1).collect();
            let plan = PlanningDecision::from_build(inst, z.clone(), y)?;
            if scenario_costs_at(inst, &plan, &b, &b.nominal(), cfg, opts)?.iter().all(Option::is_some) {
                return Ok(Some(plan));
            }
        }
    }
    Ok(None)
}

/// Dualized MILP against vertex enumeration, then the returned vertex is
/// replayed through the per-scenario LPs and the ambiguity program.
pub fn subproblem_matches_corners(inst: &NetworkInstance, cfg: &OpsConfig, opts: &SolveOptions) -> Result<Check> {
    let Some(plan) = operable_plan(inst, cfg, opts)? else {
        return Ok(Check::Skip);
    };
    let b = BoxSet::from_instance(inst);
    let amb = AmbiguitySet::from_instance(inst)?;
    let fast = solve_subproblem(inst, &plan, &b, &amb, cfg, &SubproblemConfig::default(), opts)?;
    let brute = oracle_subproblem_bruteforce(inst, &plan, &b, &amb, cfg, opts)?;
    if fast.feasible != brute.feasible {
        return Ok(Check::Fail(format!("feasibility {} vs oracle {}", fast.feasible, brute.feasible)));
    }
    if !brute.feasible {
        return Ok(Check::Skip);
    }
    let err = rel_err(fast.value, brute.value);
    if err > SUBPROBLEM_TOL {
        return Ok(Check::Error(err, SUBPROBLEM_TOL));
    }
    let costs: Option<Vec<f64>> = scenario_costs_at(inst, &plan, &b, &fast.delta, cfg, opts)?.into_iter().collect();
    let Some(costs) = costs else {
        return Ok(Check::Fail("certificate vertex is not operable".into()));
    };
    let (_, replay) = worst_case_probabilities(&costs, &amb)?;
    let replay_err = rel_err(replay, fast.value);
    if replay_err > REPLAY_TOL {
        return Ok(Check::Fail(format!("certificate replays to {replay}, reported {}", fast.value)));
    }
    Ok(Check::Error(err, SUBPROBLEM_TOL))
}

/// Greedy water-filling against the LP, plus dominance over the nominal
/// distribution and the zero-budget reduction.
fn ambiguity_draw(rng: &mut ChaCha8Rng) -> Result<Check> {
    let n = rng.gen_range(1..=10);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let pi0: Vec<f64> = raw.iter().map(|w| w / sum).collect();
    let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
    let amb = AmbiguitySet::with_budgets(pi0.clone(), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5));
    let (_, lp) = worst_case_probabilities_lp(&costs, &amb)?;
    let (_, greedy) = worst_case_greedy(&costs, &amb)?;
    let nominal: f64 = pi0.iter().zip(&costs).map(|(p, c)| p * c).sum();
    if greedy < nominal - AMBIGUITY_TOL * nominal.abs().max(1.0) {
        return Ok(Check::Fail(format!("worst case {greedy} below nominal {nominal}")));
    }
    let (_, frozen) = worst_case_greedy(&costs, &AmbiguitySet::with_budgets(pi0, 0.0, 0.0))?;
    if rel_err(frozen, nominal) > AMBIGUITY_TOL {
        return Ok(Check::Fail(format!("zero budgets give {frozen}, nominal {nominal}")));
    }
    Ok(Check::Error(rel_err(lp, greedy), AMBIGUITY_TOL))
}

/// Carbon consumed at the loads equals carbon emitted by the generators.
pub fn cef_balance(inst: &NetworkInstance, opts: &SolveOptions) -> Result<Check> {
    let plan = first_radial_plan(inst)?;
    let b = BoxSet::from_instance(inst);
    let data = NodalData::realize(inst, &b, &b.nominal())?;
    let Some(sol) = solve_operation(inst, &plan, &data, &inst.uncertainty.ev_scenarios_mw[0], &OpsConfig::default(), opts)? else {
        return Ok(Check::Skip);
    };
    let (dispatch, cef) = optimize_procurement(&sol.point, inst, IntensityMode::Horizon)?;
    let mut worst: f64 = 0.0;
    for t in 0..inst.num_intervals() {
        let consumed: f64 = (0..inst.num_nodes()).map(|i| cef.intensity[i][t] * cef.loads.load[i][t]).sum();
        let emitted = dispatch.generator_intensity[t] * (dispatch.p_tg[t] + dispatch.p_tc[t]);
        worst = worst.max((consumed - emitted).abs());
    }
    Ok(Check::Error(worst, CEF_TOL))
}

/// Inexact and exact loops end within the loop tolerance of each other.
pub fn loops_agree(inst: &NetworkInstance, params: &IccgParams, opts: &SolveOptions) -> Result<Check> {
    let problem = PlanningProblem::new(inst, OpsConfig::default(), opts.clone())?;
    let (i, c) = match (iccg_solve(&problem, params), ccg_solve(&problem, params)) {
        (Ok(i), Ok(c)) => (i, c),
        (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => return Ok(Check::Skip),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    if !i.converged || !c.converged {
        return Ok(Check::Fail(format!("converged: iccg {} ccg {}", i.converged, c.converged)));
    }
    Ok(Check::Error((i.objective - c.objective).abs() / c.objective.abs().max(1e-9), params.epsilon))
}
