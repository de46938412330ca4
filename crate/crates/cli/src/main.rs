use clap::Parser;

use ris_cli::{exit_code, run, Cli, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
