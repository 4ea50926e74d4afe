//! Discovery of dependency-bearing files and static extraction of their
//! declarations. Nothing is executed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use log::warn;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::formats::{environment, pyproject, requirements, setup_cfg, setup_py};
use crate::model::{FileKind, PackageName, RequirementSpec, SourceLocation};
use crate::text::decode;

const EXCLUDED_DIRS: &[&str] = &[
    ".git",
    "node_modules",
    "venv",
    ".venv",
    "build",
    "dist",
    ".pytrim",
    "__pycache__",
    ".tox",
    ".nox",
];

const LOCK_FILES: &[&str] = &["poetry.lock", "Pipfile.lock", "uv.lock", "pdm.lock"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParseStatus {
    Parsed,
    PartiallyParsed,
    Dynamic,
    Failed,
}

/// How a configuration file came to be considered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// Matched a filename pattern during the tree walk.
    Discovered,
    /// Reached through `-r` from another requirements file.
    Included,
    /// Named by a string literal in `setup.py`; its entries feed the
    /// declaration locations but not the static dependency set.
    SetupPyReference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFile {
    /// Relative to the project root.
    pub path: PathBuf,
    pub file_kind: FileKind,
    pub parse_status: ParseStatus,
    pub origin: Origin,
}

/// A project tree plus the options that shape how it is walked.
#[derive(Debug, Clone)]
pub struct Project {
    pub root: PathBuf,
    exclude: GlobSet,
    pub exclude_tests: bool,
}

impl Project {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::NotADirectory(root));
        }
        Ok(Project {
            root,
            exclude: GlobSet::empty(),
            exclude_tests: false,
        })
    }

    pub fn with_excludes<S: AsRef<str>>(mut self, patterns: &[S]) -> Result<Self> {
        let mut builder = GlobSetBuilder::new();
        for p in patterns {
            builder.add(Glob::new(p.as_ref())?);
        }
        self.exclude = builder.build()?;
        Ok(self)
    }

    pub fn with_exclude_tests(mut self, exclude_tests: bool) -> Self {
        self.exclude_tests = exclude_tests;
        self
    }

    pub fn read(&self, rel: &Path) -> Result<String> {
        let full = self.root.join(rel);
        let bytes = fs::read(&full).map_err(|e| Error::io(&full, e))?;
        Ok(decode(&bytes, rel).text)
    }

    fn excluded(&self, rel: &Path) -> bool {
        self.exclude.is_match(rel)
    }
}

/// Every file of interest in a project tree, in lexicographic path order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    pub config_files: Vec<ConfigFile>,
    pub lock_files: Vec<PathBuf>,
    pub unmodifiable: Vec<PathBuf>,
    pub python_sources: Vec<PathBuf>,
}

fn is_requirements_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    (lower.contains("requirements") && lower.ends_with(".txt"))
        || (lower.ends_with(".in") && lower != "manifest.in")
}

/// `requirements/dev.txt` and the like.
fn in_requirements_dir(rel: &Path) -> bool {
    rel.extension().is_some_and(|e| e == "txt")
        && rel
            .parent()
            .and_then(Path::file_name)
            .is_some_and(|d| d.eq_ignore_ascii_case("requirements"))
}

fn is_environment_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.starts_with("environment") && (lower.ends_with(".yml") || lower.ends_with(".yaml"))
}

fn is_unmodifiable_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    name.starts_with("Dockerfile")
        || lower.starts_with("readme")
        || [".sh", ".rst", ".md"].iter().any(|ext| lower.ends_with(ext))
}

fn is_test_path(rel: &Path) -> bool {
    let mut components = rel.components().peekable();
    while let Some(c) = components.next() {
        let part = c.as_os_str().to_string_lossy();
        if components.peek().is_some() {
            if part == "test" || part == "tests" {
                return true;
            }
        } else {
            return part.starts_with("test_") || part.ends_with("_test.py") || part == "conftest.py";
        }
    }
    false
}

fn normalize_rel(path: &Path) -> Option<PathBuf> {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                if !out.pop() {
                    return None;
                }
            }
            std::path::Component::Normal(p) => out.push(p),
            _ => return None,
        }
    }
    Some(out)
}

/// Walks the tree and classifies files. Requirements files reached through
/// `-r` (one level) and requirement files named in `setup.py` are added.
pub fn discover_config_files(project: &Project) -> Result<Discovery> {
    let mut found = Discovery::default();
    let walker = WalkDir::new(&project.root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0
                || !(e.file_type().is_dir()
                    && EXCLUDED_DIRS.contains(&e.file_name().to_string_lossy().as_ref()))
        });
    for entry in walker {
        let entry = match entry {
            Ok(entry) => entry,
            Err(e) => {
                warn!("skipping unreadable entry: {e}");
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(&project.root) else { continue };
        let rel = rel.to_path_buf();
        if project.excluded(&rel) {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        let at_root = entry.depth() == 1;
        let kind = match name.as_ref() {
            "pyproject.toml" if at_root => Some(FileKind::PyProjectToml),
            "setup.py" if at_root => Some(FileKind::SetupPy),
            "setup.cfg" if at_root => Some(FileKind::SetupCfg),
            n if is_requirements_name(n) || in_requirements_dir(&rel) => Some(FileKind::Requirements),
            n if is_environment_name(n) => Some(FileKind::YamlEnv),
            _ => None,
        };
        if let Some(kind) = kind {
            found.config_files.push(ConfigFile {
                path: rel.clone(),
                file_kind: kind,
                parse_status: ParseStatus::Parsed,
                origin: Origin::Discovered,
            });
        }
        if LOCK_FILES.contains(&name.as_ref()) {
            found.lock_files.push(rel.clone());
        } else if is_unmodifiable_name(&name) {
            found.unmodifiable.push(rel.clone());
        }
        if name.ends_with(".py") && !(project.exclude_tests && is_test_path(&rel)) {
            found.python_sources.push(rel);
        }
    }

    let mut known: BTreeSet<PathBuf> = found.config_files.iter().map(|c| c.path.clone()).collect();
    let mut extra = Vec::new();

    // `-r` includes, one level deep; `known` doubles as the cycle guard.
    let roots: Vec<PathBuf> = found
        .config_files
        .iter()
        .filter(|c| c.file_kind == FileKind::Requirements)
        .map(|c| c.path.clone())
        .collect();
    for rel in roots {
        let Ok(text) = project.read(&rel) else { continue };
        let dir = rel.parent().unwrap_or(Path::new(""));
        for target in requirements::parse(&text, &rel).includes {
            let Some(target_rel) = normalize_rel(&dir.join(&target)) else {
                warn!("{}: include `{target}` leaves the project; ignored", rel.display());
                continue;
            };
            if !project.root.join(&target_rel).is_file() {
                warn!("{}: included file `{target}` not found", rel.display());
                continue;
            }
            if known.insert(target_rel.clone()) {
                extra.push(ConfigFile {
                    path: target_rel,
                    file_kind: FileKind::Requirements,
                    parse_status: ParseStatus::Parsed,
                    origin: Origin::Included,
                });
            }
        }
    }

    let setup = Path::new("setup.py");
    if known.contains(setup) {
        if let Ok(analysis) = project.read(setup).and_then(|t| setup_py::analyze(&t, setup)) {
            for reference in analysis.referenced_files {
                let Some(target_rel) = normalize_rel(Path::new(&reference)) else { continue };
                if project.root.join(&target_rel).is_file() && known.insert(target_rel.clone()) {
                    extra.push(ConfigFile {
                        path: target_rel,
                        file_kind: FileKind::Requirements,
                        parse_status: ParseStatus::Parsed,
                        origin: Origin::SetupPyReference,
                    });
                }
            }
        }
    }

    found.config_files.extend(extra);
    found.config_files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(found)
}

/// Declarations from one file plus how well parsing went.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFile {
    pub specs: Vec<RequirementSpec>,
    pub status: ParseStatus,
    /// Lines of computed dependency expressions (setup.py only).
    pub dynamic_lines: Vec<usize>,
    pub project_name: Option<String>,
}

impl ParsedFile {
    fn failed() -> Self {
        ParsedFile {
            specs: Vec::new(),
            status: ParseStatus::Failed,
            dynamic_lines: Vec::new(),
            project_name: None,
        }
    }

    fn with(specs: Vec<RequirementSpec>, status: ParseStatus) -> Self {
        ParsedFile {
            specs,
            status,
            dynamic_lines: Vec::new(),
            project_name: None,
        }
    }
}

pub fn parse_requirements_file(text: &str, path: &Path) -> Vec<RequirementSpec> {
    requirements::parse(text, path).specs
}

pub fn parse_pyproject(text: &str, path: &Path) -> Result<Vec<RequirementSpec>> {
    Ok(pyproject::entries(text, path)?
        .into_iter()
        .map(|e| RequirementSpec {
            requirement: e.requirement,
            location: SourceLocation::new(path, e.line, FileKind::PyProjectToml).with_detail(e.table_path),
        })
        .collect())
}

pub fn parse_setup_cfg(text: &str, path: &Path) -> Result<Vec<RequirementSpec>> {
    setup_cfg::parse(text, path)
}

/// Literal declarations of a `setup.py` and whether anything was computed.
/// A file that does not parse yields nothing and counts as dynamic.
pub fn parse_setup_py_static(text: &str, path: &Path) -> (Vec<RequirementSpec>, bool) {
    match setup_py::analyze(text, path) {
        Ok(analysis) => (setup_py_specs(&analysis, path), analysis.dynamic),
        Err(_) => (Vec::new(), true),
    }
}

fn setup_py_specs(analysis: &setup_py::SetupPyAnalysis, path: &Path) -> Vec<RequirementSpec> {
    analysis
        .entries
        .iter()
        .map(|e| RequirementSpec {
            requirement: e.requirement.clone(),
            location: SourceLocation::new(path, e.line, FileKind::SetupPy).with_detail(e.detail.clone()),
        })
        .collect()
}

pub fn parse_environment(text: &str, path: &Path) -> Result<Vec<RequirementSpec>> {
    Ok(environment::entries(text, path)?
        .into_iter()
        .map(|e| RequirementSpec {
            requirement: e.requirement,
            location: SourceLocation::new(path, e.line + 1, FileKind::YamlEnv)
                .with_detail(if e.in_pip_block { "dependencies.pip" } else { "dependencies" }),
        })
        .collect())
}

/// Parses one configuration file, degrading to `Failed` with a warning
/// instead of aborting.
pub fn parse_config_file(text: &str, path: &Path, kind: FileKind) -> ParsedFile {
    let degrade = |e: Error| {
        warn!("{}: skipped: {e}", path.display());
        ParsedFile::failed()
    };
    match kind {
        FileKind::Requirements => {
            let file = requirements::parse(text, path);
            let status = if file.warnings.is_empty() {
                ParseStatus::Parsed
            } else {
                ParseStatus::PartiallyParsed
            };
            ParsedFile::with(file.specs, status)
        }
        FileKind::PyProjectToml => match parse_pyproject(text, path) {
            Ok(specs) => ParsedFile {
                project_name: pyproject::project_name(text),
                ..ParsedFile::with(specs, ParseStatus::Parsed)
            },
            Err(e) => degrade(e),
        },
        FileKind::SetupCfg => match parse_setup_cfg(text, path) {
            Ok(specs) => ParsedFile {
                project_name: setup_cfg::project_name(text),
                ..ParsedFile::with(specs, ParseStatus::Parsed)
            },
            Err(e) => degrade(e),
        },
        FileKind::SetupPy => match setup_py::analyze(text, path) {
            Ok(analysis) => ParsedFile {
                specs: setup_py_specs(&analysis, path),
                status: if analysis.dynamic {
                    ParseStatus::Dynamic
                } else {
                    ParseStatus::Parsed
                },
                dynamic_lines: analysis.dynamic_lines,
                project_name: analysis.project_name,
            },
            Err(e) => degrade(e),
        },
        FileKind::YamlEnv => match parse_environment(text, path) {
            Ok(specs) => ParsedFile::with(specs, ParseStatus::Parsed),
            Err(e) => degrade(e),
        },
        FileKind::PythonSource | FileKind::Unmodifiable => ParsedFile::with(Vec::new(), ParseStatus::Parsed),
    }
}

/// The outcome of static resolution over a whole project.
#[derive(Debug, Clone, Default)]
pub struct StaticResolution {
    pub discovery: Discovery,
    /// Declarations per file, keyed by relative path.
    pub specs: BTreeMap<PathBuf, Vec<RequirementSpec>>,
    /// Statically declared dependencies with every declaration location.
    pub dependencies: BTreeMap<PackageName, Vec<SourceLocation>>,
    /// Declarations in files only `setup.py` points at.
    pub referenced: BTreeMap<PackageName, Vec<SourceLocation>>,
    /// Lines of computed dependency expressions in `setup.py`.
    pub setup_py_dynamic_lines: Vec<usize>,
    pub project_name: Option<String>,
}

impl StaticResolution {
    pub fn declared_names(&self) -> BTreeSet<PackageName> {
        self.dependencies.keys().cloned().collect()
    }

    /// Every known declaration location of `pkg`, static or referenced.
    pub fn locations(&self, pkg: &PackageName) -> Vec<SourceLocation> {
        let mut out: Vec<SourceLocation> = self
            .dependencies
            .get(pkg)
            .into_iter()
            .chain(self.referenced.get(pkg))
            .flatten()
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn config_file(&self, path: &Path) -> Option<&ConfigFile> {
        self.discovery.config_files.iter().find(|c| c.path == path)
    }
}

/// Discovers and parses every configuration file, then unions the
/// declarations by normalized name.
pub fn static_dependency_set(project: &Project) -> Result<StaticResolution> {
    let mut discovery = discover_config_files(project)?;
    let mut resolution = StaticResolution::default();
    let mut names = BTreeMap::new();

    for file in &mut discovery.config_files {
        let text = match project.read(&file.path) {
            Ok(text) => text,
            Err(e) => {
                warn!("{e}");
                file.parse_status = ParseStatus::Failed;
                continue;
            }
        };
        let parsed = parse_config_file(&text, &file.path, file.file_kind);
        file.parse_status = parsed.status;
        if let Some(name) = parsed.project_name {
            names.entry(file.file_kind).or_insert(name);
        }
        if file.file_kind == FileKind::SetupPy {
            resolution.setup_py_dynamic_lines = parsed.dynamic_lines;
        }
        let target = if file.origin == Origin::SetupPyReference {
            &mut resolution.referenced
        } else {
            &mut resolution.dependencies
        };
        for spec in &parsed.specs {
            target.entry(spec.name().clone()).or_default().push(spec.location.clone());
        }
        resolution.specs.insert(file.path.clone(), parsed.specs);
    }

    resolution.project_name = [FileKind::PyProjectToml, FileKind::SetupCfg, FileKind::SetupPy]
        .iter()
        .find_map(|k| names.get(k).cloned());
    resolution.discovery = discovery;
    Ok(resolution)
}
