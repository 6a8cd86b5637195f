use std::process::ExitCode;

use clap::Parser;

use fracheat_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version are not failures; usage errors are internal (1),
            // since 2 is reserved for violated hypotheses.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.deterministic {
        // Must happen before the first parallel section builds the pool.
        std::env::set_var("RAYON_NUM_THREADS", "1");
    }
    match run(&cli) {
        Ok(summary) => {
            println!("{}", summary.json.display());
            println!("{}", summary.csv.display());
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e.exit_code();
            if code == 2 {
                eprintln!("fracheat: precondition violated: {e}");
            } else {
                eprintln!("fracheat: {e}");
            }
            ExitCode::from(code)
        }
    }
}
