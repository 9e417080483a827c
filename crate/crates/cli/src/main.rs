fn main() {
    std::process::exit(egr_cli::run(std::env::args_os()));
}
