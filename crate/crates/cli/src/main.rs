fn main() {
    std::process::exit(gatwo_cli::main_with_args(std::env::args_os()));
}
