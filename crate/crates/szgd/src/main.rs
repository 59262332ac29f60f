fn main() {
    std::process::exit(szgd::harness::cli::cli(std::env::args_os()));
}
