fn main() {
    std::process::exit(kmsgraph_cli::run(std::env::args_os()));
}
