//! Planning and applying the edits that remove unused packages.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use regex::Regex;
use similar::TextDiff;

use crate::detector::map_package_to_imports;
use crate::error::{Error, Result};
use crate::formats::{environment, pyproject, python_source, requirements, setup_cfg, setup_py};
use crate::model::{
    BloatFinding, DistributionRecord, EditPlan, FileEdit, FileKind, ManualFlag, PackageName, SourceLocation,
};
use crate::resolver_static::{ParseStatus, StaticResolution};
use crate::text::{decode, encode};

pub fn remove_from_requirements(content: &str, pkg: &PackageName) -> String {
    requirements::remove(content, pkg)
}

pub fn remove_from_toml(content: &str, pkg: &PackageName) -> Result<String> {
    pyproject::remove(content, pkg, Path::new("pyproject.toml"))
}

pub fn remove_from_setup_cfg(content: &str, pkg: &PackageName) -> Result<String> {
    setup_cfg::remove(content, pkg, Path::new("setup.cfg"))
}

pub fn remove_from_setup_py(content: &str, pkg: &PackageName) -> Result<String> {
    setup_py::remove(content, pkg, Path::new("setup.py"))
}

pub fn remove_from_environment(content: &str, pkg: &PackageName) -> Result<String> {
    environment::remove(content, pkg, Path::new("environment.yml"))
}

pub fn remove_imports_from_source(content: &str, import_names: &BTreeSet<String>) -> Result<String> {
    Ok(python_source::remove_imports(content, import_names, Path::new("module.py"))?.text)
}

/// Removes `pkg`'s declarations from a configuration file of `kind`.
pub fn remove_declaration(kind: FileKind, content: &str, pkg: &PackageName, path: &Path) -> Result<String> {
    match kind {
        FileKind::Requirements => Ok(requirements::remove(content, pkg)),
        FileKind::PyProjectToml => pyproject::remove(content, pkg, path),
        FileKind::SetupCfg => setup_cfg::remove(content, pkg, path),
        FileKind::SetupPy => setup_py::remove(content, pkg, path),
        FileKind::YamlEnv => environment::remove(content, pkg, path),
        FileKind::PythonSource | FileKind::Unmodifiable => Ok(content.to_string()),
    }
}

fn error_line(err: &Error) -> usize {
    match err {
        Error::Unsupported { line, .. } | Error::IniSyntax { line, .. } => *line,
        _ => 1,
    }
}

fn whole_word(names: &[&str]) -> Regex {
    let alternatives: Vec<String> = names.iter().map(|n| regex::escape(n)).collect();
    Regex::new(&format!(
        r"(?i)(?:^|[^A-Za-z0-9_-])(?:{})(?:$|[^A-Za-z0-9_-])",
        alternatives.join("|")
    ))
    .expect("escaped alternatives form a valid regex")
}

/// Lines mentioning `pkg` (raw or normalized, case-insensitive, whole word)
/// in the given files.
pub fn flag_unmodifiable_mentions(root: &Path, files: &[PathBuf], pkg: &PackageName) -> Vec<ManualFlag> {
    flag_mentions(root, files, pkg, FileKind::Unmodifiable, "file is not edited automatically")
}

fn flag_mentions(root: &Path, files: &[PathBuf], pkg: &PackageName, kind: FileKind, why: &str) -> Vec<ManualFlag> {
    let re = whole_word(&[pkg.raw(), pkg.normalized()]);
    let mut flags = Vec::new();
    for rel in files {
        let Ok(bytes) = fs::read(root.join(rel)) else { continue };
        let text = decode(&bytes, rel).text;
        for (i, line) in text.lines().enumerate() {
            if re.is_match(line) {
                flags.push(ManualFlag {
                    location: SourceLocation::new(rel, i + 1, kind),
                    reason: format!("mentions `{}`; {why}", pkg.normalized()),
                });
            }
        }
    }
    flags
}

/// Lock files whose manifest was edited by the plan. Lock files are never
/// modified.
pub fn check_lockfile_sync(lock_files: &[PathBuf], plan: &EditPlan) -> Vec<PathBuf> {
    let edited: BTreeSet<&Path> = plan.file_edits.iter().map(|e| e.file_path.as_path()).collect();
    lock_files
        .iter()
        .filter(|lock| {
            let dir = lock.parent().unwrap_or(Path::new(""));
            let manifest = match lock.file_name().and_then(|n| n.to_str()) {
                Some("poetry.lock" | "uv.lock" | "pdm.lock") => "pyproject.toml",
                Some("Pipfile.lock") => "Pipfile",
                _ => return false,
            };
            edited.contains(dir.join(manifest).as_path())
        })
        .cloned()
        .collect()
}

fn import_tops(text: &str, path: &Path) -> BTreeSet<String> {
    python_source::scan(text, path, FileKind::PythonSource)
        .map(|b| b.into_iter().map(|b| b.top_level).collect())
        .unwrap_or_default()
}

#[derive(Default)]
struct FileWork {
    kind: Option<FileKind>,
    packages: BTreeSet<PackageName>,
    import_names: BTreeSet<String>,
}

/// Computes every edit for `findings` without touching the disk. Files that
/// cannot be edited become manual flags.
pub fn plan_removal(
    root: &Path,
    statics: &StaticResolution,
    findings: &[BloatFinding],
    dist_records: Option<&[DistributionRecord]>,
) -> EditPlan {
    let mut plan = EditPlan::default();
    let actionable: Vec<&BloatFinding> = findings.iter().filter(|f| !f.report_only).collect();
    if actionable.is_empty() {
        return plan;
    }

    let mut work: BTreeMap<PathBuf, FileWork> = BTreeMap::new();
    for finding in &actionable {
        for loc in &finding.declared_at {
            let entry = work.entry(loc.file_path.clone()).or_default();
            entry.kind = Some(loc.file_kind);
            entry.packages.insert(finding.package.clone());
        }
    }

    let import_names: BTreeSet<String> = actionable
        .iter()
        .flat_map(|f| map_package_to_imports(&f.package, dist_records))
        .collect();
    for rel in &statics.discovery.python_sources {
        work.entry(rel.clone()).or_default().import_names = import_names.clone();
    }

    for (rel, job) in work {
        let full = root.join(&rel);
        let original = match fs::read(&full) {
            Ok(bytes) => bytes,
            Err(e) => {
                plan.manual_flags.push(ManualFlag {
                    location: SourceLocation::new(&rel, 1, job.kind.unwrap_or(FileKind::PythonSource)),
                    reason: format!("cannot read file: {e}"),
                });
                continue;
            }
        };
        let decoded = decode(&original, &rel);
        let mut text = decoded.text.clone();
        let mut removed = BTreeSet::new();
        let mut failed = false;

        if let Some(kind) = job.kind {
            for pkg in &job.packages {
                match remove_declaration(kind, &text, pkg, &rel) {
                    Ok(next) => {
                        if next != text {
                            removed.insert(pkg.clone());
                        }
                        text = next;
                    }
                    Err(e) => {
                        plan.manual_flags.push(ManualFlag {
                            location: SourceLocation::new(&rel, error_line(&e), kind),
                            reason: format!("could not remove `{}`: {e}", pkg.normalized()),
                        });
                        failed = true;
                        break;
                    }
                }
            }
        }

        let is_source = rel.extension().is_some_and(|e| e == "py");
        if !failed && is_source && !job.import_names.is_empty() {
            let source_kind = job.kind.unwrap_or(FileKind::PythonSource);
            match python_source::remove_imports(&text, &job.import_names, &rel) {
                Ok(result) => {
                    for line in result.flagged_lines {
                        plan.manual_flags.push(ManualFlag {
                            location: SourceLocation::new(&rel, line, source_kind),
                            reason: "dynamic import of a removed package".to_string(),
                        });
                    }
                    if result.text != text {
                        let before = import_tops(&text, &rel);
                        let after = import_tops(&result.text, &rel);
                        for finding in &actionable {
                            let names = map_package_to_imports(&finding.package, dist_records);
                            if names.iter().any(|n| before.contains(n) && !after.contains(n)) {
                                removed.insert(finding.package.clone());
                            }
                        }
                    }
                    text = result.text;
                }
                Err(e) => {
                    // Unparseable sources never bound any import; only
                    // report when a declaration edit was involved.
                    if job.kind.is_some() {
                        plan.manual_flags.push(ManualFlag {
                            location: SourceLocation::new(&rel, 1, source_kind),
                            reason: format!("could not remove imports: {e}"),
                        });
                    }
                    failed = true;
                }
            }
        }

        if failed || text == decoded.text {
            continue;
        }
        plan.file_edits.push(FileEdit {
            file_kind: job.kind.unwrap_or(FileKind::PythonSource),
            file_path: rel,
            new_content: encode(&text, decoded.encoding),
            original_content: original,
            removed_packages: removed,
        });
    }

    let setup = Path::new("setup.py");
    if statics.config_file(setup).is_some_and(|c| c.parse_status == ParseStatus::Dynamic) {
        for &line in &statics.setup_py_dynamic_lines {
            plan.manual_flags.push(ManualFlag {
                location: SourceLocation::new(setup, line, FileKind::SetupPy),
                reason: "dynamic dependency construction".to_string(),
            });
        }
    }

    let unparsed: Vec<(PathBuf, FileKind)> = statics
        .discovery
        .config_files
        .iter()
        .filter(|c| c.parse_status == ParseStatus::Failed)
        .map(|c| (c.path.clone(), c.file_kind))
        .collect();
    for finding in &actionable {
        plan.manual_flags.extend(flag_unmodifiable_mentions(
            root,
            &statics.discovery.unmodifiable,
            &finding.package,
        ));
        for (path, kind) in &unparsed {
            plan.manual_flags.extend(flag_mentions(
                root,
                std::slice::from_ref(path),
                &finding.package,
                *kind,
                "file could not be parsed",
            ));
        }
    }
    plan.manual_flags.sort();
    plan.manual_flags.dedup();
    plan.lockfile_warnings = check_lockfile_sync(&statics.discovery.lock_files, &plan);
    plan
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    DryRun,
    Write,
}

/// Unified diff of one edit, with `a/` and `b/` path prefixes.
pub fn unified_diff(edit: &FileEdit) -> String {
    let old = decode(&edit.original_content, &edit.file_path).text;
    let new = decode(&edit.new_content, &edit.file_path).text;
    let path = edit.file_path.to_string_lossy();
    TextDiff::from_lines(&old, &new)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{path}"), &format!("b/{path}"))
        .to_string()
}

/// Returns the diffs of every edit. In `Write` mode every file is first
/// checked against its planned original, then replaced atomically.
pub fn apply_edits(root: &Path, plan: &EditPlan, mode: ApplyMode) -> Result<Vec<String>> {
    if mode == ApplyMode::Write {
        for edit in &plan.file_edits {
            let full = root.join(&edit.file_path);
            let current = fs::read(&full).map_err(|e| Error::io(&full, e))?;
            if current != edit.original_content {
                return Err(Error::StaleFile(edit.file_path.clone()));
            }
        }
        for edit in &plan.file_edits {
            write_atomically(&root.join(&edit.file_path), &edit.new_content)?;
        }
    }
    Ok(plan.file_edits.iter().map(unified_diff).collect())
}

fn write_atomically(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let permissions = fs::metadata(path).map_err(|e| Error::io(path, e))?.permissions();
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(content).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    fs::set_permissions(tmp.path(), permissions).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
