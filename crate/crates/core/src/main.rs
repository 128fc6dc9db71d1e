fn main() {
    std::process::exit(sofic_core::cli::run(std::env::args_os()));
}
