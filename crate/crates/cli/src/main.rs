fn main() {
    std::process::exit(pdflow_cli::run(std::env::args_os()));
}
