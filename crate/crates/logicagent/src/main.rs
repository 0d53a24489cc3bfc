fn main() {
    std::process::exit(logicagent::cli::main());
}
