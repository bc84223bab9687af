fn main() {
    std::process::exit(breathers::cli::main_with_args(std::env::args_os()));
}
