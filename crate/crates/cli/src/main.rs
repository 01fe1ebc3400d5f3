fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(hullfacets_cli::run(&args));
}
