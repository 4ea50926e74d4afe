//! The end-to-end run: resolve, detect (or accept findings), plan.

use std::path::Path;
use std::time::Duration;

use log::warn;

use crate::detector::{detect_unused, load_external_findings, scan_imports, DetectorInput};
use crate::error::Result;
use crate::model::{BloatFinding, DistributionRecord, EditPlan, PackageName};
use crate::remover::plan_removal;
use crate::resolver_dynamic::{resolve_dependencies, resolve_dynamic, Installer, DEFAULT_TIMEOUT};
use crate::resolver_static::{static_dependency_set, Project, StaticResolution};

#[derive(Debug, Clone)]
pub struct Options {
    /// Removal-only mode: these names are taken as unused and detection is
    /// skipped.
    pub remove: Option<Vec<String>>,
    pub dynamic: bool,
    pub installer: Installer,
    pub timeout: Duration,
    pub excludes: Vec<String>,
    pub exclude_tests: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            remove: None,
            dynamic: true,
            installer: Installer::default(),
            timeout: DEFAULT_TIMEOUT,
            excludes: Vec::new(),
            exclude_tests: false,
        }
    }
}

impl Options {
    pub fn removal_only(names: &[&str]) -> Self {
        Options {
            remove: Some(names.iter().map(|s| s.to_string()).collect()),
            dynamic: false,
            ..Options::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub project_name: String,
    pub statics: StaticResolution,
    pub dist_records: Option<Vec<DistributionRecord>>,
    pub findings: Vec<BloatFinding>,
    pub plan: EditPlan,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn packages(&self) -> Vec<PackageName> {
        self.findings.iter().map(|f| f.package.clone()).collect()
    }
}

pub fn run(root: &Path, options: &Options) -> Result<Outcome> {
    let project = Project::new(root)?
        .with_excludes(&options.excludes)?
        .with_exclude_tests(options.exclude_tests);
    let statics = static_dependency_set(&project)?;
    let bindings = scan_imports(root, &statics.discovery.python_sources);
    let mut warnings = Vec::new();
    let mut dist_records = None;

    let findings = match &options.remove {
        Some(names) => load_external_findings(names, &statics, &bindings, None)?,
        None => {
            let installable = ["setup.py", "pyproject.toml"]
                .iter()
                .any(|f| root.join(f).is_file());
            let mut graph = None;
            if options.dynamic && installable {
                let name = statics
                    .project_name
                    .as_deref()
                    .and_then(|n| PackageName::new(n).ok());
                match resolve_dynamic(&options.installer, root, name.as_ref(), options.timeout) {
                    Ok(resolved) => {
                        graph = Some(resolved.graph);
                        dist_records = Some(resolved.records);
                    }
                    Err(e) => {
                        let msg = format!("dynamic resolution failed ({e}); using static declarations only");
                        warn!("{msg}");
                        warnings.push(msg);
                    }
                }
            }
            let provenance = resolve_dependencies(&statics, graph.as_ref());
            let input = DetectorInput {
                dependencies: provenance
                    .keys()
                    .map(|name| (name.clone(), statics.locations(name)))
                    .collect(),
                provenance,
                dist_records: dist_records.clone(),
                source_files: statics.discovery.python_sources.clone(),
            };
            detect_unused(&input, &bindings)
        }
    };

    let plan = plan_removal(root, &statics, &findings, dist_records.as_deref());
    let project_name = statics.project_name.clone().unwrap_or_else(|| {
        root.canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| root.display().to_string())
    });
    Ok(Outcome {
        project_name,
        statics,
        dist_records,
        findings,
        plan,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn detection_without_install() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("requirements.txt"), "rich\nprettytable\n").unwrap();
        fs::write(dir.path().join("app.py"), "from rich import print\n").unwrap();
        let options = Options {
            dynamic: false,
            ..Options::default()
        };
        let out = run(dir.path(), &options).unwrap();
        assert_eq!(out.packages(), [PackageName::new("prettytable").unwrap()]);
        assert_eq!(out.plan.file_edits.len(), 1);
        assert_eq!(out.plan.file_edits[0].new_content, b"rich\n");
    }

    #[test]
    fn failed_install_degrades_to_static() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("setup.py"), "from setuptools import setup\nsetup(name='x', install_requires=['six'])\n").unwrap();
        let options = Options {
            installer: Installer::parse("false").unwrap(),
            ..Options::default()
        };
        let out = run(dir.path(), &options).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.packages(), [PackageName::new("six").unwrap()]);
        assert_eq!(out.project_name, "x");
    }
}
