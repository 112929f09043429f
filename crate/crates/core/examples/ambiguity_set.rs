//! Radii of the EV scenario ambiguity set and the worst-case distribution for
//! a set of scenario costs.

use pses_plan::instance::demo6;
use pses_plan::uncertainty::{worst_case_probabilities, AmbiguitySet};

fn main() -> pses_plan::Result<()> {
    let inst = demo6();
    let amb = AmbiguitySet::from_instance(&inst)?;
    println!("pi0 {:?}", amb.pi0);
    println!("theta1 {:.5}, theta_inf {:.5}", amb.theta1, amb.theta_inf);
    let costs: Vec<f64> = (0..amb.num_scenarios()).map(|s| 10.0 + 3.0 * s as f64).collect();
    let nominal: f64 = amb.pi0.iter().zip(&costs).map(|(p, c)| p * c).sum();
    let (pi, worst) = worst_case_probabilities(&costs, &amb)?;
    println!("costs {costs:?}");
    println!("nominal expectation {nominal:.4}, worst case {worst:.4} at {pi:.4?}");
    Ok(())
}
