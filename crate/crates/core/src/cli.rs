//! Command-line front end: `plan`, `evaluate`, `oracle` and `validate`.
//!
//! Exit codes: 0 success, 1 input error, 2 non-convergence, 3 solver
//! failure or a failed validation check.


use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carbon::IntensityMode;
use crate::cases::{case_study_instance, run_case_matrix, write_case_table_csv, CaseMatrixReport};
use crate::error::{Error, Result};
use crate::iccg::{build_master, ccg_solve, iccg_solve, oracle_plan_enumeration, IccgOutcome, IccgParams, PlanningProblem};
use crate::instance::{
    ensure_valid, graph_instance, random_instance, BuiltinInstance, NetworkInstance, PlanningDecision, RandomInstanceSpec,
};
use crate::milp::write_lp_file;
use crate::operations::{build_fixed_plan_lp, default_solve_options, polygon_contains, solve_operation, OpsConfig};
use crate::report::{
    evaluate_plan, write_intensity_csv, write_json, write_plan_outputs, write_voltage_csv, ConfigEcho, CostBreakdown,
    PlanEvaluation, PlanReport, VoltageStats,
};
use crate::subproblem::{build_subproblem, oracle_subproblem_bruteforce, solve_subproblem, SubproblemConfig};
use crate::topology::{enumerate_radial_topologies, is_radial, milp_feasible_topologies};
use crate::uncertainty::{worst_case_greedy, worst_case_probabilities_lp, AmbiguitySet, BoxSet, NodalData};
use crate::validation::{run_property_suites, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Exit code for an error that escaped a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. } | Error::MalformedProgram(_) | Error::UnboundedM(_) | Error::SingularSystem { .. } => EXIT_SOLVER,
        Error::IterationCapExceeded(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "pses-plan", version, about = "Robust co-planning of distribution networks and PV-storage-EV stations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the planning problem and write the report files.
    Plan(PlanArgs),
    /// Operate a fixed plan at one realization.
    Evaluate(EvaluateArgs),
    /// Run a brute-force oracle next to its fast path.
    Oracle(OracleArgs),
    /// Run the seeded property sweeps, optionally the case matrix.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Iccg,
    Ccg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Topology,
    Subproblem,
    Ambiguity,
    Ess,
    /// Exhaustive plan enumeration against the inexact loop.
    Plan,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Bundled name (demo6, coastal47, case-study, random, k3..k7) or a JSON path.
    #[arg(long, default_value = "demo6")]
    pub instance: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Polygon sides for line capacity.
    #[arg(long, default_value_t = 8)]
    pub facets: usize,
    /// Tangent segments of the loss surrogate.
    #[arg(long, default_value_t = 8)]
    pub loss_segments: usize,
}

impl ModelArgs {
    fn ops(&self) -> OpsConfig {
        OpsConfig {
            facets: self.facets,
            loss_segments: self.loss_segments,
            relaxed_ess: true,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Mode::Iccg)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.005)]
    pub epsilon_tilde: f64,
    #[arg(long, default_value_t = 0.05)]
    pub master_gap0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 60)]
    pub max_iterations: usize,
    /// horizon or per-interval generator intensity.
    #[arg(long, default_value = "horizon")]
    pub intensity: IntensityMode,
    /// Directory for LP files of the final master, subproblem and operation program.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// plan.json as written by `plan`.
    #[arg(long)]
    pub plan: PathBuf,
    /// JSON with `delta` and `pi`; a `report.json` also works. Nominal when absent.
    #[arg(long)]
    pub realization: Option<PathBuf>,
    /// Evaluate at the plan's own worst case instead.
    #[arg(long, conflicts_with = "realization")]
    pub worst_case: bool,
    #[arg(long, default_value = "horizon")]
    pub intensity: IntensityMode,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub which: OracleKind,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draws per sweep.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Also run cases A to D on `--instance`.
    #[arg(long)]
    pub case_matrix: bool,
    #[arg(long, default_value = "case-study")]
    pub instance: String,
    #[arg(long, default_value_t = 8)]
    pub facets: usize,
    #[arg(long, default_value_t = 8)]
    pub loss_segments: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Plan(a) => {
            let (report, _) = cmd_plan(a)?;
            let s = &report.stats;
            println!(
                "{}: objective {:.4} lower bound {:.4} gap {:.3e} iterations {} converged {}",
                report.instance, s.objective, s.lower_bound, s.relative_gap, s.iterations, s.converged
            );
            print_costs(&report.costs);
            println!("wrote {}", a.out_dir.display());
            Ok(if s.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Evaluate(a) => {
            let r = cmd_evaluate(a)?;
            println!("feasible {} infeasible scenarios {:?}", r.feasible, r.infeasible_scenarios);
            print_costs(&r.costs);
            println!("binding constraints {}", r.binding.len());
            Ok(EXIT_OK)
        }
        Command::Oracle(a) => {
            let r = cmd_oracle(a)?;
            println!("{:?} oracle {} fast {} difference {:.3e}", r.which, r.oracle, r.fast, r.difference);
            if !r.detail.is_empty() {
                println!("{}", r.detail);
            }
            Ok(EXIT_OK)
        }
        Command::Validate(a) => {
            let (suite, cases) = cmd_validate(a)?;
            for s in &suite.suites {
                let verdict = if s.ok() { "pass" } else { "FAIL" };
                println!("{verdict} {:<11} {} cases, {} skipped, max error {:.2e}", s.name, s.cases, s.skipped, s.max_error);
                for f in &s.failures {
                    println!("     {f}");
                }
            }
            let mut ok = suite.all_pass;
            if let Some(m) = &cases {
                for o in &m.orderings {
                    println!("{} {:<22} {:.6} vs {:.6}", if o.holds { "pass" } else { "FAIL" }, o.name, o.lhs, o.rhs);
                }
                ok &= m.all_hold();
            }
            Ok(if ok { EXIT_OK } else { EXIT_SOLVER })
        }
    }
}

fn print_costs(c: &CostBreakdown) {
    println!(
        "lines {:.4} stations {:.4} salt {:.4} loss {:.4} carbon {:.4} procurement {:.4} subsidy {:.4} total {:.4}",
        c.line_construction, c.pses_investment, c.salt_spray, c.network_loss, c.carbon, c.procurement, c.subsidy, c.total
    );
}

/// Resolves a bundled name or reads and validates a JSON file.
pub fn load_instance(spec: &str, seed: u64) -> Result<NetworkInstance> {
    let inst = if let Ok(b) = spec.parse::<BuiltinInstance>() {
        b.load()
    } else if spec == "case-study" {
        case_study_instance()?
    } else if spec == "random" {
        random_instance(seed, RandomInstanceSpec::default())
    } else if let Some(n) = spec.strip_prefix('k').and_then(|n| n.parse::<usize>().ok()).filter(|n| (2..=7).contains(n)) {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        graph_instance(n, &edges, &[0])
    } else {
        NetworkInstance::load(Path::new(spec)).map_err(|e| Error::Domain(format!("cannot load instance `{spec}`: {e}")))?
    };
    ensure_valid(&inst)?;
    Ok(inst)
}

fn params_of(a: &PlanArgs) -> IccgParams {
    IccgParams {
        epsilon: a.epsilon,
        epsilon_tilde: a.epsilon_tilde,
        master_gap0: a.master_gap0,
        alpha: a.alpha,
        max_iterations: a.max_iterations,
        ..IccgParams::default()
    }
}

pub fn cmd_plan(a: &PlanArgs) -> Result<(PlanReport, IccgOutcome)> {
    let inst = load_instance(&a.model.instance, a.model.seed)?;
    let params = params_of(a);
    params.validate()?;
    let ops = a.model.ops();
    let problem = PlanningProblem::new(&inst, ops, default_solve_options())?;
    let outcome = match a.mode {
        Mode::Iccg => iccg_solve(&problem, &params)?,
        Mode::Ccg => ccg_solve(&problem, &params)?,
    };
    let w = &outcome.worst_case;
    let eval = evaluate_plan(&inst, &outcome.plan, &problem.boxset, &w.delta, &w.pi, &ops, a.intensity, &problem.opts)?;
    let echo = ConfigEcho {
        mode: format!("{:?}", a.mode).to_lowercase(),
        params,
        ops,
        intensity_mode: a.intensity,
        seed: a.model.seed,
    };
    let report = PlanReport::new(&a.model.instance, &inst, &outcome, &eval, echo);
    write_plan_outputs(&a.out_dir, &report, &outcome, &eval)?;
    if let Some(dir) = &a.dump_lp {
        fs::create_dir_all(dir)?;
        let (master, ..) = build_master(&problem, &outcome.scenarios, None)?;
        write_lp_file(&master, &dir.join("master.lp"))?;
        let sub = build_subproblem(&inst, &outcome.plan, &problem.boxset, &problem.amb, &ops, SubproblemConfig::default().dual_cap)?;
        write_lp_file(&sub.mip, &dir.join("subproblem.lp"))?;
        let data = NodalData::realize(&inst, &problem.boxset, &w.delta)?;
        let (op, _) = build_fixed_plan_lp(&inst, &outcome.plan, &data, &inst.uncertainty.ev_scenarios_mw[0], &ops);
        write_lp_file(&op, &dir.join("operation.lp"))?;
    }
    Ok((report, outcome))
}

/// Point in the uncertainty set. Also reads the worst case from a plan report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Realization {
    #[serde(default, alias = "worst_case_delta")]
    pub delta: Option<Vec<f64>>,
    #[serde(default, alias = "worst_case_pi")]
    pub pi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Binding {
    pub scenario: usize,
    /// `v_min`, `v_max`, `line_capacity`, `substation_p_min` or `substation_p_max`.
    pub kind: String,
    /// Node, line or substation node.
    pub index: usize,
    pub t: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub scenario: usize,
    pub probability: f64,
    pub loss_surrogate: f64,
    pub loss_true: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub instance: String,
    pub plan: PlanningDecision,
    pub delta: Vec<f64>,
    pub pi: Vec<f64>,
    pub feasible: bool,
    pub infeasible_scenarios: Vec<usize>,
    pub costs: CostBreakdown,
    pub true_loss: f64,
    pub surrogate_gap_bound: f64,
    pub voltage: VoltageStats,
    pub average_intensity: f64,
    pub scenarios: Vec<ScenarioSummary>,
    pub binding: Vec<Binding>,
}

/// Rejects plans that are not radial or break an area's station limits.
pub fn check_plan(inst: &NetworkInstance, plan: &PlanningDecision) -> Result<()> {
    if plan.z.len() != inst.num_lines() || plan.y.len() != inst.pses.len() {
        return Err(Error::DimensionMismatch(format!(
            "plan has {} lines / {} stations, instance {} / {}",
            plan.z.len(),
            plan.y.len(),
            inst.num_lines(),
            inst.pses.len()
        )));
    }
    if !is_radial(&plan.z, inst) {
        return Err(Error::Domain("plan topology is not radial".into()));
    }
    for a in &inst.areas {
        let n = inst.pses.iter().zip(&plan.y).filter(|(c, &b)| b && a.nodes.contains(&c.node)).count();
        if n < a.pses_min || n > a.pses_max {
            return Err(Error::Domain(format!("area {} builds {n} stations, allowed {}..={}", a.name, a.pses_min, a.pses_max)));
        }
    }
    Ok(())
}

fn binding_constraints(inst: &NetworkInstance, plan: &PlanningDecision, eval: &PlanEvaluation, facets: usize) -> Vec<Binding> {
    const TOL: f64 = 1e-6;
    let mut out = Vec::new();
    let subs = inst.substation_nodes();
    for e in &eval.scenarios {
        let s = e.scenario;
        let mut push = |kind: &str, index: usize, t: usize, value: f64| {
            out.push(Binding { scenario: s, kind: kind.into(), index, t, value });
        };
        for (i, row) in e.point.voltages().iter().enumerate() {
            if inst.is_substation(i) {
                continue;
            }
            for (t, &v) in row.iter().enumerate() {
                if v <= inst.nodes[i].v_min_pu + TOL {
                    push("v_min", i, t, v);
                } else if v >= inst.nodes[i].v_max_pu - TOL {
                    push("v_max", i, t, v);
                }
            }
        }
        for (l, line) in inst.lines.iter().enumerate() {
            if !plan.z[l] {
                continue;
            }
            for t in 0..inst.num_intervals() {
                let (p, q) = (e.point.p_line[l][t], e.point.q_line[l][t]);
                let grown = 1.0 + TOL;
                if p.hypot(q) > TOL && !polygon_contains(facets, line.smax_mva, true, p * grown, q * grown, 0.0) {
                    push("line_capacity", l, t, p.hypot(q));
                }
            }
        }
        for (k, &node) in subs.iter().enumerate() {
            let spec = inst.nodes[node].substation.as_ref().expect("substation node");
            for (t, &p) in e.point.p_sub[k].iter().enumerate() {
                if p >= spec.p_max_mw - TOL {
                    push("substation_p_max", node, t, p);
                } else if p <= spec.p_min_mw + TOL {
                    push("substation_p_min", node, t, p);
                }
            }
        }
    }
    out
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<EvaluationReport> {
    let inst = load_instance(&a.model.instance, a.model.seed)?;
    let plan: PlanningDecision = serde_json::from_str(&fs::read_to_string(&a.plan)?)?;
    check_plan(&inst, &plan)?;
    let ops = a.model.ops();
    ops.validate()?;
    let opts = default_solve_options();
    let boxset = BoxSet::from_instance(&inst);
    let (delta, pi) = if a.worst_case {
        let amb = AmbiguitySet::from_instance(&inst)?;
        let w = solve_subproblem(&inst, &plan, &boxset, &amb, &ops, &SubproblemConfig::default(), &opts)?;
        (w.delta, w.pi)
    } else {
        let r: Realization = match &a.realization {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => Realization::default(),
        };
        (r.delta.unwrap_or_else(|| boxset.nominal()), r.pi.unwrap_or_else(|| inst.uncertainty.pi0.clone()))
    };
    let eval = evaluate_plan(&inst, &plan, &boxset, &delta, &pi, &ops, a.intensity, &opts)?;
    let report = EvaluationReport {
        instance: a.model.instance.clone(),
        binding: binding_constraints(&inst, &plan, &eval, ops.facets),
        scenarios: eval
            .scenarios
            .iter()
            .map(|e| {
                let v = e.point.voltages();
                let all = v.iter().flatten();
                ScenarioSummary {
                    scenario: e.scenario,
                    probability: e.probability,
                    loss_surrogate: e.loss_surrogate,
                    loss_true: e.loss_true,
                    v_min: all.clone().copied().fold(f64::INFINITY, f64::min),
                    v_max: all.copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect(),
        plan,
        delta,
        pi,
        feasible: eval.feasible,
        infeasible_scenarios: eval.infeasible_scenarios.clone(),
        costs: eval.costs,
        true_loss: eval.true_loss,
        surrogate_gap_bound: eval.surrogate_gap_bound,
        voltage: eval.voltage,
        average_intensity: eval.average_intensity,
    };
    fs::create_dir_all(&a.out_dir)?;
    write_json(&a.out_dir.join("evaluation.json"), &report)?;
    write_voltage_csv(&eval, fs::File::create(a.out_dir.join("voltage_profiles.csv"))?)?;
    write_intensity_csv(&eval, fs::File::create(a.out_dir.join("intensity_heatmap.csv"))?)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub which: OracleKind,
    pub instance: String,
    pub oracle: f64,
    pub fast: f64,
    pub difference: f64,
    pub detail: String,
}

fn first_operable_plan(inst: &NetworkInstance, ops: &OpsConfig) -> Result<PlanningDecision> {
    let b = BoxSet::from_instance(inst);
    let data = NodalData::realize(inst, &b, &b.nominal())?;
    let opts = default_solve_options();
    let k = inst.pses.len();
    for z in enumerate_radial_topologies(inst, 100_000)? {
        for mask in (0..1u32 << k).rev() {
            let plan = PlanningDecision::from_build(inst, z.clone(), (0..k).map(|j| mask >> j & 1 == 1).collect())?;
            if check_plan(inst, &plan).is_err() {
                continue;
            }
            let mut ok = true;
            for ev in &inst.uncertainty.ev_scenarios_mw {
                if solve_operation(inst, &plan, &data, ev, ops, &opts)?.is_none() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(plan);
            }
        }
    }
    Err(Error::Infeasible("no radial plan can be operated at the nominal point".into()))
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<OracleReport> {
    let inst = load_instance(&a.model.instance, a.model.seed)?;
    let ops = a.model.ops();
    ops.validate()?;
    let opts = default_solve_options();
    let (oracle, fast, detail) = match a.which {
        OracleKind::Topology => {
            let brute = enumerate_radial_topologies(&inst, 100_000)?;
            let milp = milp_feasible_topologies(&inst, 100_000, &opts)?;
            let mut b = brute.clone();
            let mut m = milp.clone();
            b.sort();
            m.sort();
            (brute.len() as f64, milp.len() as f64, format!("sets equal: {}", b == m))
        }
        OracleKind::Subproblem => {
            let plan = first_operable_plan(&inst, &ops)?;
            let b = BoxSet::from_instance(&inst);
            let amb = AmbiguitySet::from_instance(&inst)?;
            let brute = oracle_subproblem_bruteforce(&inst, &plan, &b, &amb, &ops, &opts)?;
            let fast = solve_subproblem(&inst, &plan, &b, &amb, &ops, &SubproblemConfig::default(), &opts)?;
            (brute.value, fast.value, format!("vertex {:?}", fast.vertex))
        }
        OracleKind::Ambiguity => {
            let amb = AmbiguitySet::from_instance(&inst)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.model.seed);
            let costs: Vec<f64> = (0..amb.num_scenarios()).map(|_| rng.gen_range(0.0..100.0)).collect();
            let (_, lp) = worst_case_probabilities_lp(&costs, &amb)?;
            let (pi, greedy) = worst_case_greedy(&costs, &amb)?;
            (lp, greedy, format!("costs {costs:?} pi {pi:?}"))
        }
        OracleKind::Ess => {
            let plan = first_operable_plan(&inst, &ops)?;
            let b = BoxSet::from_instance(&inst);
            let data = NodalData::realize(&inst, &b, &b.nominal())?;
            let ev = &inst.uncertainty.ev_scenarios_mw[0];
            let binary = OpsConfig { relaxed_ess: false, ..ops };
            let solve = |cfg: &OpsConfig| -> Result<f64> {
                solve_operation(&inst, &plan, &data, ev, cfg, &opts)?
                    .map(|s| s.cost)
                    .ok_or_else(|| Error::Infeasible("operation at the nominal point".into()))
            };
            (solve(&binary)?, solve(&ops)?, "binary storage MILP vs relaxed LP, scenario 0".into())
        }
        OracleKind::Plan => {
            let problem = PlanningProblem::new(&inst, ops, opts.clone())?;
            let e = oracle_plan_enumeration(&problem, 100_000)?;
            let fast = iccg_solve(&problem, &IccgParams::default())?;
            (e.objective, fast.objective, format!("{} plans enumerated", e.plans))
        }
    };
    let report = OracleReport {
        which: a.which,
        instance: a.model.instance.clone(),
        oracle,
        fast,
        difference: (oracle - fast).abs(),
        detail,
    };
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("oracle_report.json"), &report)?;
    }
    Ok(report)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<(SuiteReport, Option<CaseMatrixReport>)> {
    let suite = run_property_suites(a.seed, a.instances)?;
    fs::create_dir_all(&a.out_dir)?;
    write_json(&a.out_dir.join("suite_report.json"), &suite)?;
    let cases = if a.case_matrix {
        let inst = load_instance(&a.instance, a.seed)?;
        let ops = OpsConfig {
            facets: a.facets,
            loss_segments: a.loss_segments,
            relaxed_ess: true,
        };
        let m = run_case_matrix(&inst, &IccgParams::default(), ops, &default_solve_options())?;
        write_json(&a.out_dir.join("case_matrix.json"), &m)?;
        write_case_table_csv(&m, fs::File::create(a.out_dir.join("case_table.csv"))?)?;
        Some(m)
    } else {
        None
    };
    Ok((suite, cases))
}
