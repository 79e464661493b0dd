fn main() {
    std::process::exit(fpeval::cli::main_with_args(std::env::args_os()));
}
