//! `pytrim`: find unused Python dependencies and remove them.

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use log::{info, warn};

use pytrim_core::model::PackageName;
use pytrim_core::pipeline::{self, Options};
use pytrim_core::remover::{apply_edits, ApplyMode};
use pytrim_core::report::{lockfile_message, render_report, ReportFormat, ReportInput};
use pytrim_core::resolver_dynamic::Installer;
use pytrim_core::vcs;

const EXIT_CLEAN: u8 = 0;
const EXIT_FOUND: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportKind {
    Md,
    Json,
}

/// Detect unused dependencies of a Python project and remove their
/// declarations and imports. Dry-run unless --write or --branch is given.
#[derive(Debug, Parser)]
#[command(name = "pytrim", version)]
struct Cli {
    /// Project root.
    #[arg(default_value = ".")]
    path: PathBuf,

    /// Skip detection and remove these packages (comma-separated).
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    remove: Vec<String>,

    /// Skip detection and remove the packages listed in FILE, one per line.
    #[arg(long, value_name = "FILE")]
    remove_file: Option<PathBuf>,

    /// Apply the edits to disk.
    #[arg(long)]
    write: bool,

    /// Print a report instead of bare diffs.
    #[arg(long, value_enum, value_name = "FORMAT")]
    report: Option<ReportKind>,

    /// Commit the edits on a new git branch and write the pull-request
    /// title and body under .pytrim/. Name it with --branch=NAME.
    #[arg(long, value_name = "NAME", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    branch: Option<String>,

    /// Do not install the project to find its dependencies.
    #[arg(long)]
    no_dynamic: bool,

    /// Installer command used for the isolated install.
    #[arg(long, env = "PYTRIM_INSTALLER", default_value = "pip")]
    installer: String,

    /// Installer timeout in seconds.
    #[arg(long, default_value_t = 600, value_name = "SECS")]
    timeout: u64,

    /// Skip paths matching this glob (repeatable).
    #[arg(long, value_name = "GLOB")]
    exclude: Vec<String>,

    /// Leave test files out of the usage scan.
    #[arg(long)]
    exclude_tests: bool,

    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// A problem with how the tool was invoked.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn removal_list(cli: &Cli) -> Result<Option<Vec<String>>> {
    let mut names: Vec<String> = cli
        .remove
        .iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if let Some(file) = &cli.remove_file {
        let text = std::fs::read_to_string(file)
            .map_err(|e| Usage(format!("cannot read {}: {e}", file.display())))?;
        names.extend(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(str::to_string),
        );
    }
    if cli.remove.is_empty() && cli.remove_file.is_none() {
        return Ok(None);
    }
    if names.is_empty() {
        bail!(Usage("no package names given to remove".into()));
    }
    for name in &names {
        PackageName::new(name).map_err(|e| Usage(e.to_string()))?;
    }
    Ok(Some(names))
}

fn paint(diff: &str) -> String {
    diff.lines()
        .map(|line| {
            let color = if line.starts_with("+++") || line.starts_with("---") {
                "1"
            } else if line.starts_with('+') {
                "32"
            } else if line.starts_with('-') {
                "31"
            } else if line.starts_with("@@") {
                "36"
            } else {
                return format!("{line}\n");
            };
            format!("\x1b[{color}m{line}\x1b[0m\n")
        })
        .collect()
}

fn run(cli: &Cli) -> Result<u8> {
    if !cli.path.is_dir() {
        bail!(Usage(format!("{} is not a directory", cli.path.display())));
    }
    let installer = Installer::parse(&cli.installer).ok_or_else(|| Usage("empty --installer".into()))?;
    let options = Options {
        remove: removal_list(cli)?,
        dynamic: !cli.no_dynamic,
        installer,
        timeout: Duration::from_secs(cli.timeout),
        excludes: cli.exclude.clone(),
        exclude_tests: cli.exclude_tests,
    };
    let outcome = pipeline::run(&cli.path, &options)?;
    let plan = &outcome.plan;

    let report_input = ReportInput {
        project: &outcome.project_name,
        findings: &outcome.findings,
        plan,
        warnings: &outcome.warnings,
        include_diffs: true,
    };

    let mut diffs = match &cli.branch {
        Some(name) => {
            let packages = outcome.packages();
            let branch = if name.is_empty() {
                vcs::todays_branch_name(&packages)
            } else {
                name.clone()
            };
            let title = vcs::pr_title(&packages);
            let body = render_report(&report_input, ReportFormat::Markdown);
            let diffs = apply_edits(&cli.path, plan, ApplyMode::DryRun)?;
            match vcs::create_branch_commit(&cli.path, plan, &branch, &title, &title, &body)? {
                Some(commit) => info!(
                    "committed {} on branch {}; pull-request body in {}",
                    commit.commit,
                    commit.branch,
                    commit.pr_body_path.display()
                ),
                None => info!("nothing to commit"),
            }
            diffs
        }
        None if cli.write => apply_edits(&cli.path, plan, ApplyMode::Write)?,
        None => apply_edits(&cli.path, plan, ApplyMode::DryRun)?,
    };

    match cli.report {
        Some(kind) => {
            let format = match kind {
                ReportKind::Md => ReportFormat::Markdown,
                ReportKind::Json => ReportFormat::Json,
            };
            print!("{}", render_report(&report_input, format));
        }
        None => {
            if outcome.findings.is_empty() {
                println!("no unused dependencies found");
            }
            let color = std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none();
            for diff in diffs.drain(..) {
                print!("{}", if color { paint(&diff) } else { diff });
            }
            for finding in outcome.findings.iter().filter(|f| f.report_only) {
                warn!("`{}` has no declaration that can be edited", finding.package.normalized());
            }
            for flag in &plan.manual_flags {
                eprintln!("manual review: {}: {}", flag.location, flag.reason);
            }
            for lock in &plan.lockfile_warnings {
                eprintln!("warning: {}", lockfile_message(lock));
            }
        }
    }

    Ok(if outcome.findings.is_empty() {
        EXIT_CLEAN
    } else {
        EXIT_FOUND
    })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use pytrim_core::Error as E;
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::NotADirectory(_)
            | E::EmptyName
            | E::InvalidName(_)
            | E::Glob(_)
            | E::NotARepo(_)
            | E::DirtyWorktree(_),
        ) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli).context("pytrim failed") {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
