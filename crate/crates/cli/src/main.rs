fn main() {
    std::process::exit(rtpm_cli::run(std::env::args_os()));
}
