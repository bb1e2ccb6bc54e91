fn main() {
    std::process::exit(toroidal_em::cli::main_with_args(std::env::args_os()));
}
