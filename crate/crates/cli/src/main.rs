fn main() {
    std::process::exit(lectalign_cli::run(std::env::args_os()));
}
