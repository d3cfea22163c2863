use clap::Parser;
use peakwidths_cli::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(outcome) => {
            for (name, why) in &outcome.skipped {
                eprintln!("skipped {name}: {why}");
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
