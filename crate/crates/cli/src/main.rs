use clap::Parser;

use syndse_cli::args::Cli;

fn main() {
    // Usage errors exit with code 2 via the parser; runtime and
    // validation failures exit with code 1.
    let cli = Cli::parse();
    if let Err(error) = syndse_cli::run(&cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
