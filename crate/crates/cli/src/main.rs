fn main() {
    std::process::exit(juicespec_cli::run(std::env::args_os()));
}
