fn main() {
    std::process::exit(olskit::cli::main_with_args(std::env::args_os()));
}
