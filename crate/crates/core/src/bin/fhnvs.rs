fn main() {
    std::process::exit(fhnvs::cli::run(std::env::args_os()));
}
