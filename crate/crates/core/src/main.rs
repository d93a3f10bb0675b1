fn main() {
    std::process::exit(reeb_holo::cli::run(std::env::args_os()));
}
