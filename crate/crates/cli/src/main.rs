fn main() {
    std::process::exit(design_miner_cli::run(std::env::args_os()));
}
