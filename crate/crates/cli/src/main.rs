fn main() {
    std::process::exit(abcd_cli::run(std::env::args_os()));
}
