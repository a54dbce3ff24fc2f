fn main() {
    std::process::exit(nacifs::cli::run_from(std::env::args_os()));
}
