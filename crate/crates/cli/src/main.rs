use clap::Parser;
use xmodal_cli::{run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("xmodal: {e}");
        std::process::exit(e.exit_code());
    }
}
