fn main() {
    std::process::exit(shearlet_core::cli::run_cli(std::env::args_os()));
}
