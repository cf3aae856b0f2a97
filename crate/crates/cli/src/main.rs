use clap::Parser;
use geomvertex_cli::config::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(geomvertex_cli::execute(&cli));
}
