fn main() {
    std::process::exit(splitree::cli::run(std::env::args_os()));
}
