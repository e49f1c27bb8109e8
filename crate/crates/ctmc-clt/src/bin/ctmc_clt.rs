fn main() {
    std::process::exit(ctmc_clt::cli::main_with_args(std::env::args_os()));
}
