fn main() {
    std::process::exit(taurob::cli::main_with_args(std::env::args_os()));
}
