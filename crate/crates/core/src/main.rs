fn main() {
    std::process::exit(solflow::cli::run_from_env());
}
