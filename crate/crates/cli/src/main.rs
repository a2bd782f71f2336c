use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use qdarwin_cli::{emit_suite, parse_scenario, run_scenario, Format, RunOptions, RunReport, Scenario};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

/// Run qdarwin scenario files and report every check against its oracle.
#[derive(Debug, Parser)]
#[command(name = "qdarwin", version)]
struct Args {
    /// A single scenario file.
    #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
    scenario: Option<PathBuf>,
    /// A directory of `*.toml` scenario files, run in parallel.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Replaces every check's default tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Replaces the seed given in the scenarios.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

const INPUT_ERROR: u8 = 2;

fn load(path: &Path) -> Result<Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut scenario = parse_scenario(&text).map_err(|e| {
        e.errors
            .iter()
            .map(|f| format!("{}: {f}", path.display()))
            .collect::<Vec<_>>()
            .join("\n")
    })?;
    if scenario.name.is_empty() {
        scenario.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(scenario)
}

fn suite_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("{}: no .toml scenarios found", dir.display()));
    }
    Ok(files)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(t) = args.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            eprintln!("--tolerance must be positive, got {t}");
            return ExitCode::from(INPUT_ERROR);
        }
    }
    let files = match (&args.scenario, &args.suite) {
        (Some(path), _) => vec![path.clone()],
        (None, Some(dir)) => match suite_files(dir) {
            Ok(files) => files,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(INPUT_ERROR);
            }
        },
        (None, None) => unreachable!("clap requires one of --scenario or --suite"),
    };

    let (scenarios, errors): (Vec<_>, Vec<_>) = files.iter().map(|p| load(p)).partition(Result::is_ok);
    if !errors.is_empty() {
        for e in errors {
            eprintln!("{}", e.unwrap_err());
        }
        return ExitCode::from(INPUT_ERROR);
    }
    let mut scenarios: Vec<Scenario> = scenarios.into_iter().map(Result::unwrap).collect();
    scenarios.sort_by(|a, b| a.name.cmp(&b.name));

    let options = RunOptions {
        seed: args.seed,
        tolerance: args.tolerance,
    };
    let results: Vec<Result<RunReport, String>> = scenarios
        .par_iter()
        .map(|s| run_scenario(s, &options).map_err(|e| format!("{}: {e}", s.name)))
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    for result in results {
        match result {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(INPUT_ERROR);
            }
        }
    }

    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Csv => Format::Csv,
    };
    let document = emit_suite(&reports, format);
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &document) {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(INPUT_ERROR);
            }
        }
        None => print!("{document}"),
    }
    if reports.iter().all(RunReport::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
