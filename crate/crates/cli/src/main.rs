fn main() {
    std::process::exit(regretlab_cli::run_cli(std::env::args_os()));
}
