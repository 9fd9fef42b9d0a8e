fn main() {
    std::process::exit(relacc_cli::run(std::env::args_os()));
}
