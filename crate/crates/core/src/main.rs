fn main() {
    env_logger::init();
    std::process::exit(blockradial::cli::run(std::env::args_os()));
}
