fn main() {
    std::process::exit(gcvrp::cli::run());
}
