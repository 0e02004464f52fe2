fn main() {
    std::process::exit(qkd_rwa::cli::main_with_args(std::env::args_os()));
}
