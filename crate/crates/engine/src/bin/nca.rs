fn main() {
    std::process::exit(nca_engine::cli::main_with_args(std::env::args_os()));
}
