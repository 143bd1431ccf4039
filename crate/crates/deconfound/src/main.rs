fn main() {
    std::process::exit(deconfound::cli::dispatch(std::env::args_os()));
}
