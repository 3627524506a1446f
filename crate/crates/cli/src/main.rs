fn main() {
    std::process::exit(claimdrift::run_from(std::env::args_os()));
}
