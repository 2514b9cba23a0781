fn main() {
    std::process::exit(structnet::harness::cli::main_with_args(std::env::args_os()));
}
