use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use uconc::cli::{Cli, Format};
use uconc::commands;
use uconc::error::{CliError, Result, EXIT_INVARIANT};
use uconc::report::ExperimentReport;

/// Directory used for reports when `--output` is absent.
const OUTPUT_DIR_VAR: &str = "UCONC_OUTPUT_DIR";

fn output_path(cli: &Cli, report: &ExperimentReport) -> Option<PathBuf> {
    if let Some(path) = &cli.output {
        return Some(path.clone());
    }
    let dir = std::env::var_os(OUTPUT_DIR_VAR).filter(|d| !d.is_empty())?;
    Some(PathBuf::from(dir).join(format!("{}.{}", report.command, cli.format.extension())))
}

fn write_report(cli: &Cli, report: &ExperimentReport) -> Result<()> {
    let emit = |out: &mut dyn Write| match cli.format {
        Format::Json => report.write_json(out),
        Format::Csv => report.write_csv(out),
    };
    match output_path(cli, report) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut out = BufWriter::new(file);
            emit(&mut out)?;
            out.flush().map_err(|e| CliError::io(&path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            emit(&mut out)?;
            out.flush().map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn run(cli: &Cli) -> Result<ExperimentReport> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Argument(format!("thread pool: {e}")))?;
    }
    let report = commands::run(cli)?;
    write_report(cli, &report)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("uconc: failed checks: {}", report.failed_checks().join("; "));
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(e) => {
            eprintln!("uconc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
