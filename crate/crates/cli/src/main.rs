fn main() {
    std::process::exit(codemapper_cli::cli::main_with(std::env::args_os()));
}
