fn main() {
    std::process::exit(ambiguous_persuasion::cli::run(std::env::args_os()));
}
