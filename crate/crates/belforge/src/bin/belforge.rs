fn main() {
    std::process::exit(belforge::cli::run(std::env::args_os()));
}
