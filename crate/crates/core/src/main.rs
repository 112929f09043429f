fn main() {
    std::process::exit(pses_plan::cli::main_from_args(std::env::args_os()));
}
