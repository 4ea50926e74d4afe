//! Domain types shared by the resolvers, the detector and the remover.

mod name;
mod requirement;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use name::{normalize_name, PackageName};
pub use requirement::{parse_requirement_line, Requirement, RequirementSpec};
pub(crate) use requirement::strip_comment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileKind {
    Requirements,
    PyProjectToml,
    SetupPy,
    SetupCfg,
    YamlEnv,
    PythonSource,
    Unmodifiable,
}

impl FileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FileKind::Requirements => "requirements",
            FileKind::PyProjectToml => "pyproject.toml",
            FileKind::SetupPy => "setup.py",
            FileKind::SetupCfg => "setup.cfg",
            FileKind::YamlEnv => "environment.yml",
            FileKind::PythonSource => "python",
            FileKind::Unmodifiable => "unmodifiable",
        }
    }
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where something was found. `file_path` is always relative to the project
/// root and `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file_path: PathBuf,
    pub line: usize,
    pub file_kind: FileKind,
    /// Extra position detail, e.g. the TOML table path or extras group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SourceLocation {
    pub fn new(file_path: impl Into<PathBuf>, line: usize, file_kind: FileKind) -> Self {
        debug_assert!(line >= 1);
        SourceLocation {
            file_path: file_path.into(),
            line: line.max(1),
            file_kind,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file_path.display(), self.line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportKind {
    /// `import x.y [as z]`
    Plain,
    /// `from x.y import z`
    FromImport,
    /// `importlib.import_module("x")`
    DynamicLiteral,
    /// `__import__("x")`
    DunderImport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportBinding {
    pub module_path: String,
    pub top_level: String,
    pub kind: ImportKind,
    pub location: SourceLocation,
    pub aliased_names: Vec<(String, Option<String>)>,
}

impl ImportBinding {
    pub fn new(
        module_path: &str,
        kind: ImportKind,
        location: SourceLocation,
        aliased_names: Vec<(String, Option<String>)>,
    ) -> Self {
        let top_level = module_path.split('.').next().unwrap_or_default().to_string();
        ImportBinding {
            module_path: module_path.to_string(),
            top_level,
            kind,
            location,
            aliased_names,
        }
    }
}

/// An installed distribution, read from its `*.dist-info` directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub name: PackageName,
    pub version: String,
    pub requires: Vec<Requirement>,
    pub import_names: BTreeSet<String>,
}

/// Installed distributions keyed by normalized name. An edge `(a, b)` means
/// `a` depends on `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeMap<String, DistributionRecord>,
    pub edges: BTreeSet<(PackageName, PackageName)>,
    pub root: PackageName,
}

impl DependencyGraph {
    pub fn direct_dependencies(&self) -> BTreeSet<PackageName> {
        self.out_neighbors(&self.root)
    }

    pub fn out_neighbors(&self, node: &PackageName) -> BTreeSet<PackageName> {
        self.edges
            .iter()
            .filter(|(from, _)| from == node)
            .map(|(_, to)| to.clone())
            .collect()
    }

    pub fn in_degree(&self, node: &PackageName) -> usize {
        self.edges.iter().filter(|(_, to)| to == node).count()
    }

    /// Everything reachable from the root, excluding the root itself.
    pub fn transitive_dependencies(&self) -> BTreeSet<PackageName> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root.clone()];
        while let Some(node) = stack.pop() {
            for next in self.out_neighbors(&node) {
                if next != self.root && seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
        seen
    }
}

/// Where a dependency name came from during resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Static,
    Dynamic,
    Both,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Static => "static",
            Provenance::Dynamic => "dynamic",
            Provenance::Both => "both",
        })
    }
}

/// A dependency judged unused by some detector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BloatFinding {
    pub package: PackageName,
    pub declared_at: Vec<SourceLocation>,
    pub import_sites: Vec<ImportBinding>,
    pub detector_id: String,
    /// Set when no declaration could be located; nothing will be edited.
    pub report_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ManualFlag {
    pub location: SourceLocation,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEdit {
    pub file_path: PathBuf,
    pub file_kind: FileKind,
    pub original_content: Vec<u8>,
    pub new_content: Vec<u8>,
    pub removed_packages: BTreeSet<PackageName>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditPlan {
    pub file_edits: Vec<FileEdit>,
    pub manual_flags: Vec<ManualFlag>,
    pub lockfile_warnings: Vec<PathBuf>,
}

impl EditPlan {
    pub fn is_empty(&self) -> bool {
        self.file_edits.is_empty() && self.manual_flags.is_empty() && self.lockfile_warnings.is_empty()
    }
}
