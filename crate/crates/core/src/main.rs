use clap::Parser;
use fpk_core::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(&cli.command));
}
