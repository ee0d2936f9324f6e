fn main() {
    std::process::exit(czgasket::cli::run_from_args(std::env::args_os()));
}
