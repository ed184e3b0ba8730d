fn main() {
    std::process::exit(philab_cli::run(std::env::args_os()));
}
