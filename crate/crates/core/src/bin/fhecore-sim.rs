fn main() {
    std::process::exit(fhecore::cli::main_entry());
}
