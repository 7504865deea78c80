fn main() {
    std::process::exit(mdid_cli::run(std::env::args_os()));
}
