fn main() {
    std::process::exit(homopt::cli::main_with(std::env::args_os()));
}
