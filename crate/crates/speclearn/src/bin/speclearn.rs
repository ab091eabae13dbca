fn main() { std::process::exit(speclearn::cli::run(std::env::args().skip(1))); }
