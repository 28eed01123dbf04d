use clap::Parser;

use qpdcut_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(record) => {
            let headline = record.metrics.get("headline").cloned().unwrap_or_default();
            println!("{}: {}", record.experiment, serde_json::to_string_pretty(&headline).unwrap_or_default());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
