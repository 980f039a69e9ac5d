fn main() {
    std::process::exit(zerocorr::cli::main_with_args(std::env::args_os()));
}
