//! Summarizes the bundled instances. With `--write <dir>` the instance JSON
//! files are regenerated from their generators.

use pses_plan::instance::{generate_coastal47, generate_demo6, validate_instance, BuiltinInstance};

fn main() -> pses_plan::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    if let Some(pos) = args.iter().position(|a| a == "--write") {
        let dir = std::path::PathBuf::from(args.get(pos + 1).map(String::as_str).unwrap_or("data"));
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("demo6.json"), generate_demo6().to_json()? + "\n")?;
        std::fs::write(dir.join("coastal47_synthetic.json"), generate_coastal47()?.to_json()? + "\n")?;
        println!("wrote instance files to {}", dir.display());
        return Ok(());
    }
    for b in BuiltinInstance::ALL {
        let inst = b.load();
        let diags = validate_instance(&inst);
        println!(
            "{:<20} nodes {:>3}  lines {:>3}  stations {:>2}  intervals {:>2}  scenarios {:>2}  diagnostics {}",
            b.name(),
            inst.num_nodes(),
            inst.num_lines(),
            inst.pses.len(),
            inst.num_intervals(),
            inst.num_scenarios(),
            diags.len()
        );
    }
    Ok(())
}
