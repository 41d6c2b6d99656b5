use clap::Parser;

fn main() {
    let cli = lsc_cli::Cli::parse();
    std::process::exit(lsc_cli::run(&cli));
}
