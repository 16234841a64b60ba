use clap::Parser;

use scaleloss::{exit, run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = match run(&cli, &mut stdout.lock()) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
