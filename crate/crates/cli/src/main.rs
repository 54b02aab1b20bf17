use std::io::Write;

use clap::Parser;

fn main() {
    let cli = sepscope_cli::Cli::parse();
    let outcome = sepscope_cli::execute(&cli);
    if let Some(doc) = outcome.document {
        let mut out = std::io::stdout().lock();
        if out.write_all(doc.as_bytes()).and_then(|_| out.flush()).is_err() {
            std::process::exit(sepscope_cli::EXIT_NUMERIC);
        }
    }
    if let Some(msg) = outcome.message {
        eprintln!("sepscope: {msg}");
    }
    std::process::exit(outcome.exit_code);
}
