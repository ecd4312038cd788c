fn main() {
    std::process::exit(mlq_cli::run(std::env::args_os()));
}
