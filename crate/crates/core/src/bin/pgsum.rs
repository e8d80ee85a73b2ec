fn main() {
    std::process::exit(periodogram_sums::cli::main_with_args(std::env::args_os()));
}
