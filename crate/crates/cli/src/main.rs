use clap::Parser;

fn main() {
    let cli = bellforge::cli::Cli::parse();
    if let Err(e) = bellforge::cli::run(&cli) {
        eprintln!("{}", e.to_json(cli.command.name()));
        std::process::exit(e.exit_code());
    }
}
