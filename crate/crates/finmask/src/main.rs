fn main() {
    if let Err(e) = finmask::cli::run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
