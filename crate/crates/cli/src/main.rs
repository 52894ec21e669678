use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use riesz_cli::{emit, parse_problem, run_task, CliError, Format};

/// Runs one problem file and writes its report.
#[derive(Parser, Debug)]
#[command(name = "riesz", version)]
struct Args {
    /// Problem file (TOML).
    #[arg(long)]
    input: PathBuf,

    #[arg(long, value_enum, default_value = "structured")]
    format: Format,

    /// Output path, or `stdout`.
    #[arg(long, default_value = "stdout")]
    output: String,

    /// Include the wall time in the report.
    #[arg(long)]
    timing: bool,
}

fn run(args: &Args) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Schema(format!("{}: {e}", args.input.display())))?;
    let file = parse_problem(&text).map_err(|e| match e {
        CliError::Schema(m) => CliError::Schema(format!("{}: {m}", args.input.display())),
        other => other,
    })?;
    let report = run_task(&file, args.timing)?;
    Ok(emit(&report, args.format))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = match run(&args) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("riesz: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = if args.output == "stdout" {
        use std::io::Write;
        std::io::stdout().write_all(out.as_bytes())
    } else {
        std::fs::write(&args.output, out)
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riesz: cannot write {}: {e}", args.output);
            ExitCode::FAILURE
        }
    }
}
