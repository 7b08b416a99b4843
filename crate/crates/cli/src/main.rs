fn main() {
    std::process::exit(tbf_cli::run(std::env::args_os()));
}
