fn main() {
    std::process::exit(ruleforge::cli::run(std::env::args_os()));
}
