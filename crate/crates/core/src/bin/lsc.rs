fn main() {
    std::process::exit(lsc::cli::main_from_args(std::env::args_os()));
}
