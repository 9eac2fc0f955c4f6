fn main() {
    std::process::exit(nonholo::cli::run(std::env::args_os()));
}
