//! Markdown and JSON reports of a run.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::model::{BloatFinding, EditPlan, FileKind, ManualFlag, Provenance, SourceLocation};
use crate::remover::unified_diff;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
}

/// Everything a report is rendered from.
#[derive(Debug, Clone)]
pub struct ReportInput<'a> {
    pub project: &'a str,
    pub findings: &'a [BloatFinding],
    pub plan: &'a EditPlan,
    /// Run-level warnings, e.g. a failed installation.
    pub warnings: &'a [String],
    pub include_diffs: bool,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: u32,
    project: &'a str,
    findings: Vec<JsonFinding<'a>>,
    edits: Vec<JsonEdit>,
    flags: &'a [ManualFlag],
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct JsonFinding<'a> {
    package: &'a str,
    raw_name: &'a str,
    detector: &'a str,
    report_only: bool,
    provenance: Option<Provenance>,
    declared_at: &'a [SourceLocation],
    import_sites: Vec<&'a SourceLocation>,
}

#[derive(Serialize)]
struct JsonEdit {
    file_path: PathBuf,
    file_kind: FileKind,
    removed_packages: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diff: Option<String>,
}

pub fn lockfile_message(lock: &std::path::Path) -> String {
    format!(
        "{} may be out of sync with its manifest; regenerate it manually",
        lock.display()
    )
}

fn all_warnings(input: &ReportInput) -> Vec<String> {
    input
        .warnings
        .iter()
        .cloned()
        .chain(input.plan.lockfile_warnings.iter().map(|l| lockfile_message(l)))
        .collect()
}

pub fn render_report(input: &ReportInput, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(input),
        ReportFormat::Json => render_json(input),
    }
}

fn render_json(input: &ReportInput) -> String {
    let report = JsonReport {
        version: SCHEMA_VERSION,
        project: input.project,
        findings: input
            .findings
            .iter()
            .map(|f| JsonFinding {
                package: f.package.normalized(),
                raw_name: f.package.raw(),
                detector: &f.detector_id,
                report_only: f.report_only,
                provenance: f.provenance,
                declared_at: &f.declared_at,
                import_sites: f.import_sites.iter().map(|b| &b.location).collect(),
            })
            .collect(),
        edits: input
            .plan
            .file_edits
            .iter()
            .map(|e| JsonEdit {
                file_path: e.file_path.clone(),
                file_kind: e.file_kind,
                removed_packages: e.removed_packages.iter().map(|p| p.normalized().to_string()).collect(),
                diff: input.include_diffs.then(|| unified_diff(e)),
            })
            .collect(),
        flags: &input.plan.manual_flags,
        warnings: all_warnings(input),
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report is always serializable");
    out.push('\n');
    out
}

fn render_markdown(input: &ReportInput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Unused dependency report: {}\n", input.project);
    if input.findings.is_empty() {
        out.push_str("No unused dependencies found.\n");
    } else {
        let names: Vec<String> = input
            .findings
            .iter()
            .map(|f| format!("`{}`", f.package.normalized()))
            .collect();
        let _ = writeln!(
            out,
            "Found {} unused {}: {}.\n",
            names.len(),
            if names.len() == 1 { "dependency" } else { "dependencies" },
            names.join(", ")
        );
    }

    for finding in input.findings {
        let pkg = &finding.package;
        let _ = writeln!(out, "## `{}`\n", pkg.normalized());
        let _ = writeln!(out, "- Detector: {}", finding.detector_id);
        if let Some(p) = finding.provenance {
            let _ = writeln!(out, "- Resolved from: {p}");
        }
        if finding.report_only {
            out.push_str("- Not declared in any editable file; reported only.\n");
        }
        let edited = |loc: &SourceLocation| {
            input
                .plan
                .file_edits
                .iter()
                .any(|e| e.file_path == loc.file_path && e.removed_packages.contains(pkg))
        };
        let (removed, kept): (Vec<_>, Vec<_>) = finding.declared_at.iter().partition(|l| edited(l));
        if !removed.is_empty() {
            out.push_str("- Removed declarations:\n");
            for loc in removed {
                let _ = writeln!(out, "  - `{loc}`");
            }
        }
        if !kept.is_empty() {
            out.push_str("- Declarations left in place:\n");
            for loc in kept {
                let _ = writeln!(out, "  - `{loc}`");
            }
        }
        let sources: Vec<&PathBuf> = input
            .plan
            .file_edits
            .iter()
            .filter(|e| e.removed_packages.contains(pkg) && !finding.declared_at.iter().any(|l| l.file_path == e.file_path))
            .map(|e| &e.file_path)
            .collect();
        if !sources.is_empty() {
            out.push_str("- Removed imports:\n");
            for path in sources {
                let _ = writeln!(out, "  - `{}`", path.display());
            }
        }
        out.push('\n');
    }

    if !input.plan.manual_flags.is_empty() {
        out.push_str("## Manual review\n\n");
        for flag in &input.plan.manual_flags {
            let _ = writeln!(out, "- `{}`: {}", flag.location, flag.reason);
        }
        out.push('\n');
    }
    let warnings = all_warnings(input);
    if !warnings.is_empty() {
        out.push_str("## Warnings\n\n");
        for w in warnings {
            let _ = writeln!(out, "- {w}");
        }
        out.push('\n');
    }
    if input.include_diffs && !input.plan.file_edits.is_empty() {
        out.push_str("## Changes\n\n");
        for edit in &input.plan.file_edits {
            let _ = writeln!(out, "```diff\n{}```\n", unified_diff(edit));
        }
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}
