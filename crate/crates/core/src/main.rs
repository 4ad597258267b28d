use clap::Parser;

use specradius::cli::{run, RunConfig};

fn main() {
    std::process::exit(run(&RunConfig::parse()));
}
