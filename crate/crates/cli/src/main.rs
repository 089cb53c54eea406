use clap::Parser;
use murmur_cli::commands::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = dispatch(cli, &mut out) {
        if !matches!(e, murmur_cli::Failure::Closed) {
            eprintln!("{e}");
        }
        std::process::exit(e.exit_code());
    }
}
