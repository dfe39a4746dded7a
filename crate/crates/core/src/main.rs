fn main() {
    std::process::exit(s3_bell::cli::run(std::env::args_os()));
}
