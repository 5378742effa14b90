fn main() {
    std::process::exit(heliflow_cli::run_cli(std::env::args_os()));
}
