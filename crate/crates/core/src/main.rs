fn main() {
    std::process::exit(hyperrig::cli::run(std::env::args_os()));
}
