use clap::Parser;

use gaussgeo_cli::args::Cli;
use gaussgeo_cli::commands::run;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("gaussgeo: {e}");
        std::process::exit(e.exit_code());
    }
}
