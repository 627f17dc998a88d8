fn main() {
    std::process::exit(bizcycle::cli::run(std::env::args_os()));
}
