fn main() {
    std::process::exit(hpuzzle::cli::run(std::env::args()));
}
