fn main() {
    std::process::exit(glovev::cli::main());
}
