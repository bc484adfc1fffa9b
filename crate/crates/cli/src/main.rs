fn main() {
    std::process::exit(excite_cli::main_with_args(std::env::args_os()));
}
