fn main() {
    std::process::exit(scgle::cli::main());
}
