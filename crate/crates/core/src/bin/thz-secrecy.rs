fn main() {
    std::process::exit(thz_secrecy::cli::run(std::env::args_os()));
}
