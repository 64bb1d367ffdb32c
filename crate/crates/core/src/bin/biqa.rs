fn main() {
    std::process::exit(biqa::cli::main_with_args(std::env::args_os()));
}
