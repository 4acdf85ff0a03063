fn main() {
    std::process::exit(arraymc::cli::run(std::env::args_os()));
}
