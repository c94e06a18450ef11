use clap::Parser;

fn main() {
    let cli = histories_cli::args::Cli::parse();
    std::process::exit(histories_cli::run(&cli));
}
