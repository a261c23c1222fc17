fn main() {
    std::process::exit(qdesync::cli::run(std::env::args_os()));
}
