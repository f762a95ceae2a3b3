use clap::Parser;
use trigger_sim_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
