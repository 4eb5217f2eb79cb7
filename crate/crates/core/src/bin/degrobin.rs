fn main() {
    std::process::exit(degrobin::cli::main_with_args(std::env::args_os()));
}
