fn main() {
    std::process::exit(gslab_cli::run(std::env::args_os()));
}
