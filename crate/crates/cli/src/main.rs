fn main() {
    std::process::exit(crossflow::run(std::env::args_os()));
}
