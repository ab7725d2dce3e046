fn main() {
    std::process::exit(cache_mimo::cli::main_with_args(std::env::args_os()));
}
