fn main() {
    std::process::exit(issuerank::cli::run(std::env::args_os()));
}
