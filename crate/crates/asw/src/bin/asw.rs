fn main() {
    std::process::exit(asw::cli::main_with_args(std::env::args_os()));
}
