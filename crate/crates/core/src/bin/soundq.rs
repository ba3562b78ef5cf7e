fn main() {
    std::process::exit(soundq::cli::run(std::env::args_os()));
}
