use std::process::ExitCode;

use clap::Parser;

use weylcap::{run, Cli, CliError, Outcome};

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
            pool.install(|| run(cli))
        }
        None => run(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|outcome| {
        outcome.report.write(cli.out.as_deref())?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("weylcap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
