fn main() {
    std::process::exit(blind_ptycho::harness::cli::run_cli(std::env::args_os()));
}
