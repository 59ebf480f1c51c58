fn main() {
    std::process::exit(membrane::cli::main_with_args(std::env::args_os()));
}
