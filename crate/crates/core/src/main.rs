fn main() {
    std::process::exit(macrolab::harness::cli::run(std::env::args_os()));
}
