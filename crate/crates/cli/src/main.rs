fn main() {
    std::process::exit(cetlab::run(std::env::args_os()));
}
