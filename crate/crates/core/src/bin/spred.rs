fn main() {
    std::process::exit(spred::cli::run(std::env::args_os()));
}
