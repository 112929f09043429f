//! Spanning trees of K4 found two ways: brute force and the radiality MILP.

use pses_plan::instance::graph_instance;
use pses_plan::operations::default_solve_options;
use pses_plan::topology::{enumerate_radial_topologies, milp_feasible_topologies, orient};

fn main() -> pses_plan::Result<()> {
    let inst = graph_instance(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[0]);
    let brute = enumerate_radial_topologies(&inst, 1000)?;
    let milp = milp_feasible_topologies(&inst, 1000, &default_solve_options())?;
    println!("brute force {} trees, MILP {} trees", brute.len(), milp.len());
    for z in brute.iter().take(3) {
        let dirs = orient(&inst, z).expect("radial");
        let arcs: Vec<String> = inst
            .lines
            .iter()
            .zip(&dirs)
            .filter(|(_, d)| d[0] || d[1])
            .map(|(l, d)| if d[1] { format!("{}->{}", l.from, l.to) } else { format!("{}->{}", l.to, l.from) })
            .collect();
        println!("  {}", arcs.join(" "));
    }
    Ok(())
}
