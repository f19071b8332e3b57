use clap::Parser;
use cpm_schwarz_cli::cli::{run, Cli};
use cpm_schwarz_cli::commands::report_written;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => report_written(&files),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
