fn main() {
    std::process::exit(pgmatroid::cli::dispatch(std::env::args_os()));
}
