fn main() {
    std::process::exit(chebjulia::cli::main_with_args(std::env::args_os()));
}
