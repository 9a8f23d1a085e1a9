fn main() {
    std::process::exit(sgm::cli::run_from_env());
}
