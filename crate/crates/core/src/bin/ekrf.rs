fn main() {
    std::process::exit(ekrf_core::cli::main());
}
