use std::process::ExitCode;

use clap::Parser;

use santalo_lab::{execute, thread_cap, Cli, CliError, EXIT_INVALID};

fn run(cli: Cli) -> Result<u8, CliError> {
    let settings = cli.args.resolve()?;
    if let Some(n) = thread_cap()? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Spec(e.to_string()))?;
    }
    execute(cli.command, &settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("santalo-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
