fn main() {
    std::process::exit(mrs::cli::run(std::env::args_os()));
}
