fn main() {
    std::process::exit(krylov_cli::main_with(std::env::args_os()));
}
