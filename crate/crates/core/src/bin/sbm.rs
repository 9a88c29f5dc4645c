fn main() {
    std::process::exit(sbm_hitting::cli::run(std::env::args_os()));
}
