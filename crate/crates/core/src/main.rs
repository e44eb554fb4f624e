fn main() {
    std::process::exit(simplexvol::cli::main_entry());
}
