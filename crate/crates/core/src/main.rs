fn main() {
    std::process::exit(ahp::cli::run(std::env::args_os()));
}
