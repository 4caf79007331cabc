fn main() {
    std::process::exit(tracerace::cli::main());
}
