use clap::Parser;

fn main() {
    let cli = ruralplan_cli::Cli::parse();
    std::process::exit(ruralplan_cli::run(&cli));
}
