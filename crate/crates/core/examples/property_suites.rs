//! Runs the randomized property suites on a handful of instances.

use pses_plan::validation::run_property_suites;

fn main() -> pses_plan::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let report = run_property_suites(0, n)?;
    for s in &report.suites {
        println!("{:<12} {} cases, {} passed, {} skipped, max error {:.2e}", s.name, s.cases, s.passed, s.skipped, s.max_error);
        for f in &s.failures {
            println!("    {f}");
        }
    }
    println!("all pass: {}", report.all_pass);
    Ok(())
}
