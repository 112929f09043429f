//! Plans demo6 with the inexact loop and with the exact loop, and prints the
//! per-iteration bounds of the first.

use pses_plan::iccg::{ccg_solve, iccg_solve, IccgParams, PlanningProblem};
use pses_plan::instance::demo6;
use pses_plan::operations::{default_solve_options, OpsConfig};

fn main() -> pses_plan::Result<()> {
    let inst = demo6();
    let problem = PlanningProblem::new(&inst, OpsConfig::default(), default_solve_options())?;
    let params = IccgParams::default();
    let fast = iccg_solve(&problem, &params)?;
    for r in &fast.trace {
        println!("{r:?}");
    }
    let exact = ccg_solve(&problem, &params)?;
    println!("inexact: objective {:.4}, {} iterations, {} backtracks", fast.objective, fast.trace.len(), fast.backtracks);
    println!("exact:   objective {:.4}, {} iterations", exact.objective, exact.trace.len());
    println!("lines {:?}", fast.plan.z.iter().enumerate().filter(|(_, &b)| b).map(|(l, _)| l).collect::<Vec<_>>());
    println!("stations {:?}", fast.plan.y);
    Ok(())
}
