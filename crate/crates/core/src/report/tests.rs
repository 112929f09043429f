use super::*;
use crate::iccg::{iccg_solve, PlanningProblem};
use crate::instance::demo6;
use crate::operations::default_solve_options;
use crate::subproblem::{scenario_costs_at, solve_subproblem};
use crate::topology::enumerate_radial_topologies;
use crate::uncertainty::AmbiguitySet;

fn operable_plan(inst: &NetworkInstance) -> PlanningDecision {
    let b = BoxSet::from_instance(inst);
    let ops = OpsConfig::default();
    for z in enumerate_radial_topologies(inst, 10_000).unwrap() {
        let plan = PlanningDecision::from_build(inst, z, vec![true, false, true, false]).unwrap();
        let costs = scenario_costs_at(inst, &plan, &b, &b.nominal(), &ops, &default_solve_options()).unwrap();
        if costs.iter().all(Option::is_some) {
            return plan;
        }
    }
    panic!("no operable plan");
}

#[test]
fn voltage_stats_match_direct_formula() {
    let v = vec![vec![1.0, 0.98], vec![0.96, 1.02]];
    let s = voltage_stats(&[(1.0, v)]);
    let mean = (1.0 + 0.98 + 0.96 + 1.02) / 4.0;
    let var = [1.0f64, 0.98, 0.96, 1.02].iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
    assert!((s.std - var.sqrt()).abs() < 1e-12);
    assert!((s.extreme_difference - 0.06).abs() < 1e-12);
    assert_eq!(voltage_stats(&[]), VoltageStats::default());
}

#[test]
fn breakdown_invariants() {
    let mut c = CostBreakdown {
        line_construction: 10.0,
        pses_investment: 5.0,
        salt_spray: 1.0,
        network_loss: 3.0,
        carbon: 2.0,
        procurement: 50.0,
        subsidy: -4.0,
        total: 67.0,
    };
    assert!(c.check().is_ok());
    c.subsidy = 4.0;
    assert!(c.check().is_err());
    c.subsidy = -4.0;
    c.total = 70.0;
    assert!(c.check().is_err());
}

#[test]
fn nominal_evaluation_prices_each_scenario() {
    let inst = demo6();
    let plan = operable_plan(&inst);
    let b = BoxSet::from_instance(&inst);
    let ops = OpsConfig::default();
    let opts = default_solve_options();
    let pi = inst.uncertainty.pi0.clone();
    let eval = evaluate_plan(&inst, &plan, &b, &b.nominal(), &pi, &ops, IntensityMode::Horizon, &opts).unwrap();
    assert!(eval.feasible);
    eval.costs.check().unwrap();
    let costs = scenario_costs_at(&inst, &plan, &b, &b.nominal(), &ops, &opts).unwrap();
    let want: f64 = costs.iter().zip(&pi).map(|(c, p)| c.unwrap() * p).sum();
    assert!((eval.costs.network_loss - want).abs() < 1e-7 * want);
    // the surrogate underestimates the quadratic loss by at most the gap bound
    assert!(eval.true_loss >= eval.costs.network_loss - 1e-7);
    assert!(eval.true_loss - eval.costs.network_loss <= eval.surrogate_gap_bound + 1e-7);
    assert!(eval.voltage.min >= 0.9 - 1e-7 && eval.voltage.max <= 1.1 + 1e-7);
}

#[test]
fn worst_case_certificate_replays() {
    let inst = demo6();
    let plan = operable_plan(&inst);
    let b = BoxSet::from_instance(&inst);
    let amb = AmbiguitySet::from_instance(&inst).unwrap();
    let ops = OpsConfig::default();
    let opts = default_solve_options();
    let w = solve_subproblem(&inst, &plan, &b, &amb, &ops, &Default::default(), &opts).unwrap();
    assert!(w.feasible);
    let eval = evaluate_plan(&inst, &plan, &b, &w.delta, &w.pi, &ops, IntensityMode::Horizon, &opts).unwrap();
    assert!((eval.costs.network_loss - w.value).abs() <= 1e-5 * w.value);
    let nominal = evaluate_plan(&inst, &plan, &b, &b.nominal(), &amb.pi0, &ops, IntensityMode::Horizon, &opts).unwrap();
    assert!(nominal.costs.network_loss <= w.value + 1e-7);
}

#[test]
fn zero_loads_cost_almost_nothing() {
    let mut inst = demo6();
    for n in &mut inst.nodes {
        n.p_load_mw.iter_mut().for_each(|p| *p = 0.0);
        n.q_load_mvar.iter_mut().for_each(|q| *q = 0.0);
    }
    for s in &mut inst.uncertainty.ev_scenarios_mw {
        s.iter_mut().for_each(|p| *p = 0.0);
    }
    for c in &mut inst.pses {
        c.pv_max_mw.iter_mut().for_each(|p| *p = 0.0);
    }
    inst.uncertainty.p_dev_mw.clear();
    inst.uncertainty.pv_dev_mw.clear();
    let plan = operable_plan(&inst);
    let b = BoxSet::from_instance(&inst);
    let pi = inst.uncertainty.pi0.clone();
    let ops = OpsConfig::default();
    let eval = evaluate_plan(&inst, &plan, &b, &[], &pi, &ops, IntensityMode::Horizon, &default_solve_options()).unwrap();
    assert!(eval.true_loss < 1e-6, "{}", eval.true_loss);
}

#[test]
fn outputs_have_documented_columns() {
    let inst = demo6();
    let p = PlanningProblem::new(&inst, OpsConfig::default(), default_solve_options()).unwrap();
    let out = iccg_solve(&p, &IccgParams::default()).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&out.trace, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "iter,phase,lb,ub,ub_bar,lb_bar,master_gap,subproblem_value,wall_ms,nodes");
    assert_eq!(lines.count(), out.trace.len());

    let eval = evaluate_plan(
        &inst,
        &out.plan,
        &p.boxset,
        &out.worst_case.delta,
        &out.worst_case.pi,
        &p.ops,
        IntensityMode::Horizon,
        &p.opts,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let echo = ConfigEcho {
        mode: "iccg".into(),
        params: IccgParams::default(),
        ops: p.ops,
        intensity_mode: IntensityMode::Horizon,
        seed: 0,
    };
    let report = PlanReport::new("demo6", &inst, &out, &eval, echo);
    report.costs.check().unwrap();
    write_plan_outputs(dir.path(), &report, &out, &eval).unwrap();
    for f in ["report.json", "plan.json", "trace.csv", "convergence.csv", "voltage_profiles.csv", "intensity_heatmap.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let heat = fs::read_to_string(dir.path().join("intensity_heatmap.csv")).unwrap();
    assert_eq!(heat.lines().count(), 1 + inst.num_nodes() * inst.num_intervals());
    let plan: PlanningDecision = serde_json::from_str(&fs::read_to_string(dir.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan, out.plan);
}
