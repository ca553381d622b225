fn main() {
    std::process::exit(flrw_boltzmann::cli::run(std::env::args_os()));
}
