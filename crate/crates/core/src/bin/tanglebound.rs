fn main() {
    std::process::exit(tanglebound::cli::run(std::env::args_os()));
}
