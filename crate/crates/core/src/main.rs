use clap::Parser;

fn main() {
    let cli = outcome_eval::cli::Cli::parse();
    if let Err(err) = outcome_eval::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
