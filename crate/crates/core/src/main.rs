fn main() {
    std::process::exit(fastbasin::cli::run(std::env::args_os()));
}
