//! Binary entry point: parse arguments, dispatch, translate errors to exit
//! codes (0 success, 1 I/O or parse failure, 2 precondition violation).

use clap::Parser;

fn main() {
    let cli = ksmooth_cli::config::Cli::parse();
    if let Err(error) = ksmooth_cli::commands::run(&cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
