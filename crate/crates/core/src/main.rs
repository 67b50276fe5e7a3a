use clap::Parser;
use nsgate::cli::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    match run(&config, &mut std::io::stdout().lock()) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
