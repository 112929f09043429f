//! A tiny knapsack through the in-house MILP layer, then written out in LP format.

use pses_plan::milp::{to_lp_format, solve_mip, MixedIntegerProgram, Relation, Sense};
use pses_plan::operations::default_solve_options;

fn main() -> pses_plan::Result<()> {
    let values = [6.0, 10.0, 12.0, 7.0];
    let weights = [1.0, 2.0, 3.0, 2.0];
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);
    let x: Vec<_> = (0..values.len()).map(|k| mip.add_binary(format!("x[{k}]"))).collect();
    for (k, &v) in x.iter().enumerate() {
        mip.add_cost(v, values[k]);
    }
    mip.add_row("capacity", x.iter().zip(weights).map(|(&v, w)| (v, w)).collect(), Relation::Le, 5.0);
    let sol = solve_mip(&mip, 0.0, &default_solve_options())?;
    let picked: Vec<usize> = (0..x.len()).filter(|&k| sol.value(x[k]) > 0.5).collect();
    println!("status {:?}, value {}, items {picked:?}", sol.status, sol.objective);
    print!("{}", to_lp_format(&mip));
    Ok(())
}
