fn main() {
    std::process::exit(fringefit::cli::run());
}
