fn main() {
    std::process::exit(sentikit::cli::run(std::env::args_os()));
}
