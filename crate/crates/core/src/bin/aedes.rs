fn main() {
    std::process::exit(aedes_core::cli::run(std::env::args_os()));
}
