fn main() {
    std::process::exit(scorebin_cli::run_cli(std::env::args_os()));
}
