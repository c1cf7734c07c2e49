fn main() {
    std::process::exit(rootflow::cli::run(std::env::args_os()));
}
