fn main() {
    std::process::exit(transeig::cli::run_cli(std::env::args_os()));
}
