fn main() {
    std::process::exit(tau_blocks_cli::run(std::env::args_os()));
}
