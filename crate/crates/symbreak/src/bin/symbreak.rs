fn main() {
    std::process::exit(symbreak::cli::main());
}
