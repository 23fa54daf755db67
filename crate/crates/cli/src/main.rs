use clap::Parser;
use optokerr_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("optokerr: {e}");
        std::process::exit(e.exit_code());
    }
}
