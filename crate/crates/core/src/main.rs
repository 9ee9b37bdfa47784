fn main() {
    std::process::exit(lawclust::cli::run(std::env::args_os()));
}
