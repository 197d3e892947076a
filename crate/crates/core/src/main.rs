use clap::Parser;

fn main() {
    let cli = moodfuse::cli::Cli::parse();
    if let Err(e) = moodfuse::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
