fn main() {
    std::process::exit(qmphase::cli::main_with_args(std::env::args_os()));
}
