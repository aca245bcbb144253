fn main() {
    std::process::exit(styleplane::cli::run());
}
