fn main() {
    std::process::exit(flowpost::cli::main());
}
