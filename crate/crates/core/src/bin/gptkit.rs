fn main() {
    std::process::exit(gptkit::cli::run(std::env::args_os()));
}
