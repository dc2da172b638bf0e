fn main() {
    std::process::exit(welch_core::cli::run(std::env::args_os()));
}
