fn main() {
    std::process::exit(taxalign::cli::run_from_args(std::env::args_os()));
}
