fn main() {
    std::process::exit(hyperpack::run(std::env::args_os()));
}
