fn main() {
    std::process::exit(lawtraverse_cli::run(std::env::args_os()));
}
