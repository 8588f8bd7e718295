use clap::Parser;
use vhj_cli::args::Cli;
use vhj_cli::commands;

fn main() {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(done) => {
            print!("{}", done.stdout);
            if let Some(e) = done.verdict {
                eprintln!("{}", e.detail());
                std::process::exit(e.exit_code());
            }
        }
        Err(e) => {
            eprintln!("{}", e.detail());
            std::process::exit(e.exit_code());
        }
    }
}
