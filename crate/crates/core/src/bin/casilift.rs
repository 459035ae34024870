fn main() {
    std::process::exit(casilift::cli::run(std::env::args_os()));
}
