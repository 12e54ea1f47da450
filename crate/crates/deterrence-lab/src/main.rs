fn main() {
    std::process::exit(deterrence_lab::cli::run(std::env::args_os()));
}
