fn main() { std::process::exit(torickgk_cli::run(std::env::args().collect())) }
