fn main() {
    std::process::exit(rankmdl_cli::run(std::env::args_os()));
}
