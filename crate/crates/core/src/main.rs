fn main() {
    std::process::exit(zermelo::cli::run(std::env::args_os()));
}
