use std::process::ExitCode;

use clap::Parser;

use lemip_cli::{emit, execute, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = emit(&report) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    eprintln!("{}", report.summary);
    ExitCode::from(report.exit_code())
}
