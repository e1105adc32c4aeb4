use clap::Parser;

fn main() {
    let cli = aba_persuasion::cli::Cli::parse();
    std::process::exit(aba_persuasion::cli::run(cli));
}
