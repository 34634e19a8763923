fn main() {
    std::process::exit(wavetomo::cli::main_with_args(std::env::args_os()));
}
