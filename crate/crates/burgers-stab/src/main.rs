fn main() {
    std::process::exit(burgers_stab::cli::main_entry());
}
