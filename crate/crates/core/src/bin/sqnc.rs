fn main() {
    std::process::exit(sqnc::harness::cli::cli_main(std::env::args_os()));
}
