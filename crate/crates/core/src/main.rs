fn main() {
    std::process::exit(predictability::cli::main_with_args(std::env::args_os()));
}
