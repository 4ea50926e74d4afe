//! Direct dependencies recovered by installing the project into an isolated
//! target directory and reading the installed distributions' metadata.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use log::{info, warn};
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::model::{
    parse_requirement_line, DependencyGraph, DistributionRecord, PackageName, Provenance,
};
use crate::resolver_static::StaticResolution;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

/// The installer command line prefix, e.g. `pip` or `python3 -m pip`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Installer {
    program: String,
    args: Vec<String>,
}

impl Installer {
    pub fn parse(command: &str) -> Option<Self> {
        let mut parts = command.split_whitespace().map(str::to_string);
        Some(Installer {
            program: parts.next()?,
            args: parts.collect(),
        })
    }
}

impl Default for Installer {
    fn default() -> Self {
        Installer {
            program: "pip".to_string(),
            args: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstallResult {
    pub target_dir: PathBuf,
    pub succeeded: bool,
    pub installer_stdout: String,
    pub installer_stderr: String,
    pub duration: Duration,
}

fn drain(mut pipe: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn has_dist_info(dir: &Path) -> bool {
    fs::read_dir(dir).is_ok_and(|entries| {
        entries
            .flatten()
            .any(|e| e.file_name().to_string_lossy().ends_with(".dist-info"))
    })
}

/// Runs `<installer> install -t <target_dir> <project_root>`.
pub fn install_isolated(
    installer: &Installer,
    project_root: &Path,
    target_dir: &Path,
    timeout: Duration,
) -> Result<InstallResult> {
    let started = Instant::now();
    let mut child = Command::new(&installer.program)
        .args(&installer.args)
        .arg("install")
        .arg("-t")
        .arg(target_dir)
        .arg(project_root)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::InstallerNotFound(installer.program.clone()),
            _ => Error::io(&installer.program, e),
        })?;
    let stdout = drain(child.stdout.take().expect("piped stdout"));
    let stderr = drain(child.stderr.take().expect("piped stderr"));

    let status = child
        .wait_timeout(timeout)
        .map_err(|e| Error::io(&installer.program, e))?;
    let Some(status) = status else {
        let _ = child.kill();
        let _ = child.wait();
        return Err(Error::Timeout(timeout));
    };
    let installer_stdout = stdout.join().unwrap_or_default();
    let installer_stderr = stderr.join().unwrap_or_default();
    Ok(InstallResult {
        target_dir: target_dir.to_path_buf(),
        succeeded: status.success() && has_dist_info(target_dir),
        installer_stdout,
        installer_stderr,
        duration: started.elapsed(),
    })
}

/// Email-style headers of a METADATA file, up to the first blank line.
fn metadata_headers(text: &str) -> Vec<(String, String)> {
    let mut headers: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            break;
        }
        if line.starts_with([' ', '\t']) {
            if let Some((_, value)) = headers.last_mut() {
                value.push(' ');
                value.push_str(line.trim());
            }
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            headers.push((key.trim().to_string(), value.trim().to_string()));
        }
    }
    headers
}

fn record_top_levels(record: &str) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(record.as_bytes());
    for row in reader.records().flatten() {
        let Some(path) = row.get(0) else { continue };
        let mut parts = path.split('/');
        let first = parts.next().unwrap_or_default();
        let nested = parts.next().is_some();
        if first.is_empty()
            || first == ".."
            || first == "__pycache__"
            || first.ends_with(".dist-info")
            || first.ends_with(".data")
        {
            continue;
        }
        let module = if nested {
            first
        } else if let Some(stem) = first.strip_suffix(".py") {
            stem
        } else if first.ends_with(".so") || first.ends_with(".pyd") {
            first.split('.').next().unwrap_or(first)
        } else {
            continue;
        };
        if !module.is_empty() && module.chars().all(|c| c.is_alphanumeric() || c == '_') {
            names.insert(module.to_string());
        }
    }
    names
}

fn read_dist_info(dir: &Path) -> Result<DistributionRecord> {
    let malformed = |reason: &str| Error::MalformedMetadata {
        path: dir.to_path_buf(),
        reason: reason.to_string(),
    };
    let metadata_path = dir.join("METADATA");
    let bytes = fs::read(&metadata_path).map_err(|_| malformed("missing METADATA"))?;
    let headers = metadata_headers(&String::from_utf8_lossy(&bytes));
    let header = |key: &str| {
        headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.clone())
    };
    let name = header("Name").ok_or_else(|| malformed("no Name header"))?;
    let name = PackageName::new(&name).map_err(|e| malformed(&e.to_string()))?;
    let version = header("Version").ok_or_else(|| malformed("no Version header"))?;

    let mut requires = Vec::new();
    for (_, value) in headers.iter().filter(|(k, _)| k.eq_ignore_ascii_case("Requires-Dist")) {
        match parse_requirement_line(value) {
            Ok(Some(req)) => requires.push(req),
            Ok(None) => {}
            Err(e) => warn!("{}: Requires-Dist `{value}`: {e}", dir.display()),
        }
    }

    let mut import_names: BTreeSet<String> = fs::read_to_string(dir.join("top_level.txt"))
        .map(|t| {
            t.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| l.replace('/', "."))
                .filter_map(|l| l.split('.').next().map(str::to_string))
                .collect()
        })
        .unwrap_or_default();
    if import_names.is_empty() {
        if let Ok(record) = fs::read_to_string(dir.join("RECORD")) {
            import_names = record_top_levels(&record);
        }
    }
    if import_names.is_empty() {
        import_names.insert(name.import_fallback());
    }
    Ok(DistributionRecord {
        name,
        version,
        requires,
        import_names,
    })
}

/// One record per readable `*.dist-info` directory, sorted by directory
/// name. Malformed distributions are skipped with a warning.
pub fn scan_dist_infos(target_dir: &Path) -> Result<Vec<DistributionRecord>> {
    let entries = fs::read_dir(target_dir).map_err(|e| Error::io(target_dir, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.extension().is_some_and(|x| x == "dist-info"))
        .collect();
    dirs.sort();
    let mut records = Vec::new();
    for dir in dirs {
        match read_dist_info(&dir) {
            Ok(record) => records.push(record),
            Err(e) => warn!("{e}"),
        }
    }
    Ok(records)
}

/// Edge `a -> b` when `a` requires `b`, `b` is installed, and the
/// requirement is not conditioned on an extra.
pub fn build_dependency_graph(
    records: &[DistributionRecord],
    project_name: Option<&PackageName>,
) -> Result<DependencyGraph> {
    if records.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let nodes: BTreeMap<String, DistributionRecord> = records
        .iter()
        .map(|r| (r.name.normalized().to_string(), r.clone()))
        .collect();
    let mut edges = BTreeSet::new();
    for record in nodes.values() {
        for req in &record.requires {
            if req.is_extra_conditioned() || req.name == record.name {
                continue;
            }
            if nodes.contains_key(req.name.normalized()) {
                edges.insert((record.name.clone(), req.name.clone()));
            }
        }
    }

    let root = match project_name.and_then(|n| nodes.get(n.normalized())) {
        Some(record) => record.name.clone(),
        None => {
            let targets: BTreeSet<&PackageName> = edges.iter().map(|(_, to)| to).collect();
            let candidates: Vec<&DistributionRecord> =
                nodes.values().filter(|r| !targets.contains(&r.name)).collect();
            match candidates.as_slice() {
                [only] => only.name.clone(),
                [] => return Err(Error::MissingRoot),
                many => {
                    return Err(Error::MultipleRoots(
                        many.iter().map(|r| r.name.normalized().to_string()).collect(),
                    ))
                }
            }
        }
    };
    Ok(DependencyGraph { nodes, edges, root })
}

/// The installed view of a project.
#[derive(Debug, Clone)]
pub struct DynamicResolution {
    pub install: InstallResult,
    pub records: Vec<DistributionRecord>,
    pub graph: DependencyGraph,
}

/// Installs into a fresh temporary directory and builds the graph.
pub fn resolve_dynamic(
    installer: &Installer,
    project_root: &Path,
    project_name: Option<&PackageName>,
    timeout: Duration,
) -> Result<DynamicResolution> {
    let target = tempfile::Builder::new()
        .prefix("pytrim-install-")
        .tempdir()
        .map_err(|e| Error::io(std::env::temp_dir(), e))?;
    info!("installing {} into {}", project_root.display(), target.path().display());
    let install = install_isolated(installer, project_root, target.path(), timeout)?;
    if !install.succeeded {
        let tail: Vec<&str> = install.installer_stderr.trim().lines().rev().take(3).collect();
        let tail: Vec<&str> = tail.into_iter().rev().collect();
        return Err(Error::InstallFailed(tail.join(" | ")));
    }
    let records = scan_dist_infos(target.path())?;
    let graph = build_dependency_graph(&records, project_name)?;
    Ok(DynamicResolution {
        install,
        records,
        graph,
    })
}

/// The union of static and dynamic direct dependencies, tagged by where
/// each name was seen.
pub fn resolve_dependencies(
    statics: &StaticResolution,
    dynamic: Option<&DependencyGraph>,
) -> BTreeMap<PackageName, Provenance> {
    let mut out: BTreeMap<PackageName, Provenance> = statics
        .dependencies
        .keys()
        .map(|n| (n.clone(), Provenance::Static))
        .collect();
    if let Some(graph) = dynamic {
        for name in graph.direct_dependencies() {
            out.entry(name)
                .and_modify(|p| *p = Provenance::Both)
                .or_insert(Provenance::Dynamic);
        }
    }
    out
}
