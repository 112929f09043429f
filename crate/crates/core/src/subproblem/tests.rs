use super::*;
use crate::instance::{demo6, random_instance, RandomInstanceSpec};
use crate::operations::default_solve_options;
use crate::topology::enumerate_radial_topologies;

fn plans(inst: &NetworkInstance, count: usize) -> Vec<PlanningDecision> {
    let topo = enumerate_radial_topologies(inst, 10_000).unwrap();
    let k = inst.pses.len();
    (0..count)
        .map(|i| {
            let z = topo[(i * 7) % topo.len()].clone();
            let y = (0..k).map(|j| (i + j) % 2 == 0).collect();
            PlanningDecision::from_build(inst, z, y).unwrap()
        })
        .collect()
}

/// Plans that can be operated at the nominal data, spread over topologies.
fn operable_plans(inst: &NetworkInstance, cfg: &OpsConfig, count: usize) -> Vec<PlanningDecision> {
    let topo = enumerate_radial_topologies(inst, 10_000).unwrap();
    let k = inst.pses.len();
    let mut out = Vec::new();
    for i in 0..topo.len() * 2 {
        let z = topo[(i * 7) % topo.len()].clone();
        let y = (0..k).map(|j| (i + j) % 2 == 0).collect();
        let p = PlanningDecision::from_build(inst, z, y).unwrap();
        if operable(inst, &p, cfg) {
            out.push(p);
            if out.len() == count {
                break;
            }
        }
    }
    out
}

fn operable(inst: &NetworkInstance, plan: &PlanningDecision, cfg: &OpsConfig) -> bool {
    let b = BoxSet::from_instance(inst);
    scenario_costs_at(inst, plan, &b, &b.nominal(), cfg, &default_solve_options())
        .unwrap()
        .iter()
        .all(Option::is_some)
}

#[test]
fn dual_block_recovers_primal_optimum() {
    let inst = demo6();
    let cfg = OpsConfig::default();
    for plan in plans(&inst, 4) {
        let b = BoxSet::from_instance(&inst);
        let data = NodalData::realize(&inst, &b, &b.nominal()).unwrap();
        let ev = &inst.uncertainty.ev_scenarios_mw[0];
        let Some(primal) = solve_operation(&inst, &plan, &data, ev, &cfg, &default_solve_options()).unwrap() else {
            continue;
        };
        let (lp, _) = build_fixed_plan_lp(&inst, &plan, &data, ev, &cfg);
        let mut host = MixedIntegerProgram::new(Sense::Maximize);
        let block = append_scaled_dual(&mut host, &lp, &LinExpr::constant(0.7), 1e6, "").unwrap();
        host.add_objective(&block.objective, 1.0);
        let dual = solve_lp(&host, &default_solve_options()).unwrap().require("dual").unwrap();
        let want = 0.7 * primal.cost;
        assert!((dual.objective - want).abs() < 1e-6 * want.abs().max(1.0), "{} vs {want}", dual.objective);
    }
}

#[test]
fn dualization_rejects_integer_programs() {
    let mut lp = MixedIntegerProgram::new(Sense::Minimize);
    lp.add_binary("b");
    let mut host = MixedIntegerProgram::new(Sense::Maximize);
    assert!(append_scaled_dual(&mut host, &lp, &LinExpr::constant(1.0), 1.0, "").is_err());
}

#[test]
fn dual_milp_matches_vertex_enumeration_on_demo6() {
    let inst = demo6();
    let b = BoxSet::from_instance(&inst);
    let amb = AmbiguitySet::from_instance(&inst).unwrap();
    let cfg = OpsConfig::default();
    let opts = default_solve_options();
    let mut checked = 0;
    for plan in operable_plans(&inst, &cfg, 8) {
        let milp = solve_subproblem(&inst, &plan, &b, &amb, &cfg, &SubproblemConfig::default(), &opts).unwrap();
        let brute = oracle_subproblem_bruteforce(&inst, &plan, &b, &amb, &cfg, &opts).unwrap();
        assert_eq!(milp.feasible, brute.feasible);
        if !brute.feasible {
            continue;
        }
        let tol = 1e-6 * brute.value.abs().max(1.0);
        assert!((milp.value - brute.value).abs() <= tol, "{} vs {}", milp.value, brute.value);
        assert!((milp.milp_value - brute.value).abs() <= tol, "{} vs {}", milp.milp_value, brute.value);
        assert!(amb.contains(&milp.pi, 1e-7));
        assert!(b.contains(&milp.delta));
        checked += 1;
    }
    assert!(checked >= 3, "only {checked} robust plans");
}

#[test]
fn dual_milp_matches_enumeration_on_random_instances() {
    let opts = default_solve_options();
    let cfg = OpsConfig { facets: 6, loss_segments: 4, ..Default::default() };
    let mut checked = 0;
    for seed in 0..6 {
        let inst = random_instance(seed, RandomInstanceSpec { scenarios: 3, box_dims: 3, ..Default::default() });
        let b = BoxSet::from_instance(&inst);
        let amb = AmbiguitySet::from_instance(&inst).unwrap();
        for plan in operable_plans(&inst, &cfg, 2) {
            let milp = solve_subproblem(&inst, &plan, &b, &amb, &cfg, &SubproblemConfig::default(), &opts).unwrap();
            let brute = oracle_subproblem_bruteforce(&inst, &plan, &b, &amb, &cfg, &opts).unwrap();
            if !brute.feasible {
                assert!(!milp.feasible, "seed {seed}: enumeration found an infeasible vertex");
                continue;
            }
            let tol = 1e-6 * brute.value.abs().max(1.0);
            assert!((milp.value - brute.value).abs() <= tol, "seed {seed}: {} vs {}", milp.value, brute.value);
            checked += 1;
        }
    }
    assert!(checked >= 4, "only {checked} checks ran");
}

#[test]
fn complementarity_form_agrees_for_fixed_probabilities() {
    let cfg = OpsConfig { facets: 4, loss_segments: 2, ..Default::default() };
    let opts = default_solve_options();
    let mut checked = 0;
    for seed in 0..4 {
        let spec = RandomInstanceSpec { nodes: 4, intervals: 2, scenarios: 2, stations: 1, extra_lines: 1, box_dims: 3 };
        let inst = random_instance(100 + seed, spec);
        let b = BoxSet::from_instance(&inst);
        let Some(plan) = operable_plans(&inst, &cfg, 1).pop() else { continue };
        let pi = inst.uncertainty.pi0.clone();
        let fixed = AmbiguitySet::with_budgets(pi.clone(), 0.0, 0.0);
        let dual = solve_subproblem(&inst, &plan, &b, &fixed, &cfg, &SubproblemConfig::default(), &opts).unwrap();
        if !dual.feasible {
            continue;
        }
        let kkt = solve_subproblem_kkt(&inst, &plan, &b, &pi, &cfg, 1e4, &opts).unwrap();
        let tol = 1e-5 * dual.value.abs().max(1.0);
        assert!((dual.value - kkt.value).abs() <= tol, "seed {seed}: {} vs {}", dual.value, kkt.value);
        assert!((kkt.milp_value - kkt.value).abs() <= tol, "seed {seed}: {} vs {}", kkt.milp_value, kkt.value);
        checked += 1;
    }
    assert!(checked >= 2, "only {checked} checks ran");
}

#[test]
fn infeasible_plan_is_flagged() {
    let mut inst = demo6();
    for n in &mut inst.nodes[1..] {
        for p in &mut n.p_load_mw {
            *p *= 6.0;
        }
    }
    let b = BoxSet::from_instance(&inst);
    let amb = AmbiguitySet::from_instance(&inst).unwrap();
    let plan = plans(&inst, 1).remove(0);
    let r = solve_subproblem(&inst, &plan, &b, &amb, &OpsConfig::default(), &SubproblemConfig::default(), &default_solve_options()).unwrap();
    assert!(!r.feasible && r.value.is_infinite());
}

#[test]
fn enumeration_limit() {
    let inst = demo6();
    let mut b = BoxSet::from_instance(&inst);
    let d = b.dims[0].clone();
    b.dims = vec![d; 21];
    let amb = AmbiguitySet::from_instance(&inst).unwrap();
    let plan = plans(&inst, 1).remove(0);
    let r = oracle_subproblem_bruteforce(&inst, &plan, &b, &amb, &OpsConfig::default(), &default_solve_options());
    assert!(matches!(r, Err(Error::CombinatorialLimitExceeded(_))));
}

