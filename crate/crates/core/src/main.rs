fn main() {
    std::process::exit(fracspec::cli::main_with_args(std::env::args_os()));
}
