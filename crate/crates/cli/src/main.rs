fn main() {
    std::process::exit(tauwork_cli::run(std::env::args_os()));
}
