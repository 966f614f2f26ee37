fn main() {
    std::process::exit(nmep::cli::main());
}
