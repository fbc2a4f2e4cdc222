fn main() {
    std::process::exit(valex::cli::run(std::env::args_os()));
}
