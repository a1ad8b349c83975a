fn main() {
    std::process::exit(endpower_cli::run(std::env::args_os()));
}
