//! Worst case of one demo6 plan: dualized MILP against vertex enumeration.

use pses_plan::instance::{demo6, PlanningDecision};
use pses_plan::operations::{default_solve_options, OpsConfig};
use pses_plan::subproblem::{oracle_subproblem_bruteforce, solve_subproblem, SubproblemConfig};
use pses_plan::topology::enumerate_radial_topologies;
use pses_plan::uncertainty::{AmbiguitySet, BoxSet};

fn main() -> pses_plan::Result<()> {
    let inst = demo6();
    let b = BoxSet::from_instance(&inst);
    let amb = AmbiguitySet::from_instance(&inst)?;
    let cfg = OpsConfig::default();
    let opts = default_solve_options();
    let z = enumerate_radial_topologies(&inst, 10_000)?.remove(0);
    let plan = PlanningDecision::from_build(&inst, z, vec![true; inst.pses.len()])?;
    let fast = solve_subproblem(&inst, &plan, &b, &amb, &cfg, &SubproblemConfig::default(), &opts)?;
    let brute = oracle_subproblem_bruteforce(&inst, &plan, &b, &amb, &cfg, &opts)?;
    println!("{} box dimensions, {} corners", b.len(), b.num_corners());
    println!("MILP worst case {:.6} at vertex {:?}", fast.value, fast.vertex);
    println!("enumeration     {:.6}", brute.value);
    println!("worst-case probabilities {:.4?}", fast.pi);
    Ok(())
}
