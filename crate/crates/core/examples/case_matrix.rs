//! Runs the four planning cases. Pass `--case-study` for the coarsened
//! 47-node instance (a few minutes in release), otherwise demo6.

use pses_plan::cases::{case_study_instance, run_case_matrix, write_case_table_csv};
use pses_plan::iccg::IccgParams;
use pses_plan::instance::demo6;
use pses_plan::operations::{default_solve_options, OpsConfig};

fn main() -> pses_plan::Result<()> {
    let inst = if std::env::args().any(|a| a == "--case-study") { case_study_instance()? } else { demo6() };
    let report = run_case_matrix(&inst, &IccgParams::default(), OpsConfig::default(), &default_solve_options())?;
    write_case_table_csv(&report, std::io::stdout())?;
    for o in &report.orderings {
        println!("{:<24} {:>12.4} {:>12.4} {}", o.name, o.lhs, o.rhs, if o.holds { "holds" } else { "fails" });
    }
    Ok(())
}
