fn main() {
    std::process::exit(tpp_depth::cli::run(std::env::args_os()));
}
