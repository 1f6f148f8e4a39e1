fn main() {
    std::process::exit(sparse_cover::cli::run(std::env::args_os()));
}
