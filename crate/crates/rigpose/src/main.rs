fn main() {
    std::process::exit(rigpose::cli::run(std::env::args_os()));
}
