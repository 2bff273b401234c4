fn main() {
    std::process::exit(dualmix::cli::run(std::env::args_os()));
}
