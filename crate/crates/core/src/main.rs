fn main() {
    std::process::exit(qsl_core::cli::run(std::env::args_os()));
}
