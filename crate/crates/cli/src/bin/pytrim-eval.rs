//! Replays recorded dependency-removal changes and grades the tool's output
//! against what the developers committed.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use pytrim_core::eval::{load_cases, replicate, results_json, summarize};

#[derive(Debug, Parser)]
#[command(name = "pytrim-eval", version)]
struct Cli {
    /// Directory holding one sub-directory per case (`pre/`, `post/`, `case.json`).
    cases_dir: PathBuf,

    /// Print machine-readable results.
    #[arg(long)]
    json: bool,
}

fn run(cli: &Cli) -> Result<()> {
    let cases = load_cases(&cli.cases_dir)
        .with_context(|| format!("loading cases from {}", cli.cases_dir.display()))?;
    let mut results = Vec::with_capacity(cases.len());
    for case in &cases {
        let result = replicate(case).with_context(|| format!("replicating {}", case.case_id))?;
        log::info!("{}: {}/{} files matched", result.case_id, result.matched, result.relevant_files);
        results.push(result);
    }

    if cli.json {
        print!("{}", results_json(&results));
        return Ok(());
    }

    for r in &results {
        let status = if r.mismatched.is_empty() { "ok" } else { "MISMATCH" };
        println!(
            "{:<32} {:>2} changed {:>2} excluded {:>2}/{:<2} matched  {status}",
            r.case_id, r.changed_files, r.excluded_files, r.matched, r.relevant_files
        );
    }
    println!();
    print!("{}", summarize(&results).to_markdown());
    for r in &results {
        for m in &r.mismatched {
            println!("\n### {} `{}`\n\n```diff\n{}```", r.case_id, m.path.display(), m.diff);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
