fn main() {
    std::process::exit(photon_router::cli::main_with_args(std::env::args_os()));
}
