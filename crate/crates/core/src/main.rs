use clap::Parser;

use fracplap::cli::{Cli, RunConfig};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            e.exit();
        }
    };
    let config = RunConfig::from(cli);
    if let Err(e) = config.execute(std::io::stdout().lock()) {
        eprintln!("fracplap: {e}");
        std::process::exit(e.exit_code());
    }
}
