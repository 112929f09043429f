//! Nodal carbon intensities of one demo6 operating point after choosing the
//! thermal/tidal split.

use pses_plan::carbon::{optimize_procurement, IntensityMode};
use pses_plan::instance::{demo6, PlanningDecision};
use pses_plan::operations::{default_solve_options, solve_operation, OpsConfig};
use pses_plan::topology::enumerate_radial_topologies;
use pses_plan::uncertainty::{BoxSet, NodalData};

fn main() -> pses_plan::Result<()> {
    let inst = demo6();
    let z = enumerate_radial_topologies(&inst, 10_000)?.remove(0);
    let plan = PlanningDecision::from_build(&inst, z, vec![true; inst.pses.len()])?;
    let b = BoxSet::from_instance(&inst);
    let data = NodalData::realize(&inst, &b, &b.nominal())?;
    let Some(sol) = solve_operation(&inst, &plan, &data, &inst.uncertainty.ev_scenarios_mw[0], &OpsConfig::default(), &default_solve_options())? else {
        println!("plan is not operable");
        return Ok(());
    };
    let (dispatch, cef) = optimize_procurement(&sol.point, &inst, IntensityMode::PerInterval)?;
    println!("generator intensity by interval {:.3?}", dispatch.generator_intensity);
    println!("carbon cost {:.4}, procurement cost {:.4}", dispatch.carbon_cost, dispatch.procurement_cost);
    for (i, row) in cef.intensity.iter().enumerate() {
        println!("node {i:>2}: {row:.3?}");
    }
    Ok(())
}
