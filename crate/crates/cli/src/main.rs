fn main() {
    std::process::exit(meminductor_cli::run(std::env::args_os()));
}
