fn main() {
    std::process::exit(blended_gbdf::cli::run(std::env::args_os()));
}
