use clap::Parser;
use dqcalc::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let text = outcome.render();
    print!("{text}");
    if let Some(path) = &cli.json_out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("dqcalc: cannot write {}: {e}", path.display());
            std::process::exit(2);
        }
    }
    std::process::exit(outcome.exit_code);
}
