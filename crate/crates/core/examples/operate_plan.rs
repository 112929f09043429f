//! Operates one fixed demo6 plan at the nominal point: storage relaxation
//! against the binary model, then the loss surrogate against the true loss.

use pses_plan::instance::{demo6, PlanningDecision};
use pses_plan::operations::{default_solve_options, operation_cost_true, solve_operation, OpsConfig};
use pses_plan::topology::enumerate_radial_topologies;
use pses_plan::uncertainty::{BoxSet, NodalData};

fn main() -> pses_plan::Result<()> {
    let inst = demo6();
    let z = enumerate_radial_topologies(&inst, 10_000)?.remove(0);
    let plan = PlanningDecision::from_build(&inst, z, vec![true; inst.pses.len()])?;
    let b = BoxSet::from_instance(&inst);
    let data = NodalData::realize(&inst, &b, &b.nominal())?;
    let ev = &inst.uncertainty.ev_scenarios_mw[0];
    let opts = default_solve_options();
    let relaxed = OpsConfig::default();
    let binary = OpsConfig { relaxed_ess: false, ..relaxed };
    let (Some(a), Some(c)) = (
        solve_operation(&inst, &plan, &data, ev, &relaxed, &opts)?,
        solve_operation(&inst, &plan, &data, ev, &binary, &opts)?,
    ) else {
        println!("plan is not operable");
        return Ok(());
    };
    println!("relaxed storage {:.6}, binary storage {:.6}", a.cost, c.cost);
    println!("surrogate cost {:.6}, with true losses {:.6}", a.cost, operation_cost_true(&a.point, &inst));
    Ok(())
}
