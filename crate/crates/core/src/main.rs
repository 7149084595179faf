fn main() {
    std::process::exit(bmeans::cli::run());
}
