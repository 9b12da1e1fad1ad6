fn main() {
    std::process::exit(forestlos::cli::run(std::env::args_os()));
}
