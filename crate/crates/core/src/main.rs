fn main() {
    std::process::exit(fragrisk::cli::main());
}
