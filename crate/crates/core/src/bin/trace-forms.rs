fn main() {
    std::process::exit(trace_forms::cli::main_with_args(std::env::args_os()));
}
