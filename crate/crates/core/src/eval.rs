//! Replication of human dependency-removal changes.
//!
//! A case holds a project before and after a developer removed some
//! packages. The tool is run in removal-only mode on a copy of the `pre`
//! tree and each file the developer changed is compared, ignoring
//! whitespace and comments, with the developer's version.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rustpython_parser::lexer::lex;
use rustpython_parser::{Mode, Tok};
use serde::{Deserialize, Serialize};
use similar::TextDiff;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::formats::requirements::logical_lines;
use crate::formats::setup_cfg::parse_ini_map;
use crate::model::strip_comment;
use crate::pipeline::{self, Options};
use crate::remover::{apply_edits, ApplyMode};
use crate::text::decode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicationCase {
    pub case_id: String,
    pub pre_tree: PathBuf,
    pub post_tree: PathBuf,
    pub removed_packages: Vec<String>,
    pub excluded_files: Vec<PathBuf>,
}

#[derive(Deserialize)]
struct CaseFile {
    removed: Vec<String>,
    #[serde(default)]
    excluded: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub path: PathBuf,
    pub diff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub case_id: String,
    /// Files that differ between `pre` and `post`.
    pub changed_files: usize,
    pub excluded_files: usize,
    pub relevant_files: usize,
    pub matched: usize,
    pub mismatched: Vec<Mismatch>,
    pub accuracy: Option<f64>,
}

fn setup_error(case: &str, reason: impl Into<String>) -> Error {
    Error::CaseSetup {
        case: case.to_string(),
        reason: reason.into(),
    }
}

/// Reads `<dir>/case.json` and checks that `pre/` and `post/` exist.
pub fn load_case(dir: &Path) -> Result<ReplicationCase> {
    let case_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest = dir.join("case.json");
    let text = fs::read_to_string(&manifest).map_err(|e| setup_error(&case_id, format!("case.json: {e}")))?;
    let file: CaseFile =
        serde_json::from_str(&text).map_err(|e| setup_error(&case_id, format!("case.json: {e}")))?;
    if file.removed.is_empty() {
        return Err(setup_error(&case_id, "no removed packages listed"));
    }
    let (pre_tree, post_tree) = (dir.join("pre"), dir.join("post"));
    for tree in [&pre_tree, &post_tree] {
        if !tree.is_dir() {
            return Err(setup_error(&case_id, format!("missing {}", tree.display())));
        }
    }
    Ok(ReplicationCase {
        case_id,
        pre_tree,
        post_tree,
        removed_packages: file.removed,
        excluded_files: file.excluded,
    })
}

/// Every case directory below `cases_dir`, sorted by id.
pub fn load_cases(cases_dir: &Path) -> Result<Vec<ReplicationCase>> {
    let entries = fs::read_dir(cases_dir).map_err(|e| Error::io(cases_dir, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.join("case.json").is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}

fn files_of(tree: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    WalkDir::new(tree)
        .sort_by_file_name()
        .into_iter()
        .flatten()
        .filter(|e| e.file_type().is_file())
        .filter_map(|e| {
            let rel = e.path().strip_prefix(tree).ok()?.to_path_buf();
            Some((rel, fs::read(e.path()).ok()?))
        })
        .collect()
}

fn copy_tree(from: &Path, to: &Path) -> std::io::Result<()> {
    for entry in WalkDir::new(from) {
        let entry = entry?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under its root");
        let target = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target)?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &target)?;
        }
    }
    Ok(())
}

#[derive(Debug, PartialEq)]
enum Normalized {
    Lines(Vec<String>),
    Tokens(Vec<Tok>),
    Toml(toml::Value),
    Yaml(serde_yaml::Value),
    Ini(BTreeMap<String, BTreeMap<String, Vec<String>>>),
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn plain_lines(text: &str) -> Normalized {
    Normalized::Lines(text.lines().map(collapse_ws).filter(|l| !l.is_empty()).collect())
}

fn requirement_lines(text: &str) -> Normalized {
    Normalized::Lines(
        logical_lines(text)
            .iter()
            .map(|l| collapse_ws(strip_comment(&l.content)))
            .filter(|l| !l.is_empty())
            .collect(),
    )
}

/// The default lexer already drops comments and non-logical newlines.
fn python_tokens(text: &str) -> Option<Normalized> {
    let mut tokens = Vec::new();
    for item in lex(text, Mode::Module) {
        let (tok, _) = item.ok()?;
        match tok {
            Tok::Rsqb | Tok::Rbrace if tokens.last() == Some(&Tok::Comma) => {
                tokens.pop();
                tokens.push(tok);
            }
            _ => tokens.push(tok),
        }
    }
    Some(Normalized::Tokens(tokens))
}

fn normalize(path: &Path, text: &str) -> Normalized {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let parsed = match ext.as_str() {
        "py" => python_tokens(text),
        "toml" => toml::from_str(text).ok().map(Normalized::Toml),
        "yml" | "yaml" => serde_yaml::from_str(text).ok().map(Normalized::Yaml),
        "cfg" | "ini" => parse_ini_map(text, path).ok().map(Normalized::Ini),
        "txt" | "in" if name != "manifest.in" => Some(requirement_lines(text)),
        _ => None,
    };
    parsed.unwrap_or_else(|| plain_lines(text))
}

/// True when both versions are the same after dropping whitespace and
/// comments. A file absent on both sides matches.
pub fn semantically_equal(path: &Path, a: Option<&[u8]>, b: Option<&[u8]>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            a == b || normalize(path, &decode(a, path).text) == normalize(path, &decode(b, path).text)
        }
        _ => false,
    }
}

fn text_diff(path: &Path, ours: Option<&[u8]>, theirs: Option<&[u8]>) -> String {
    let ours = ours.map(|b| decode(b, path).text).unwrap_or_default();
    let theirs = theirs.map(|b| decode(b, path).text).unwrap_or_default();
    let p = path.to_string_lossy();
    TextDiff::from_lines(&ours, &theirs)
        .unified_diff()
        .header(&format!("tool/{p}"), &format!("expected/{p}"))
        .to_string()
}

/// Runs removal-only mode on a copy of `pre` and grades every file the
/// developer changed.
pub fn replicate(case: &ReplicationCase) -> Result<ReplicationResult> {
    let work = tempfile::tempdir().map_err(|e| setup_error(&case.case_id, e.to_string()))?;
    copy_tree(&case.pre_tree, work.path()).map_err(|e| setup_error(&case.case_id, e.to_string()))?;

    let names: Vec<&str> = case.removed_packages.iter().map(String::as_str).collect();
    let outcome = pipeline::run(work.path(), &Options::removal_only(&names))?;
    apply_edits(work.path(), &outcome.plan, ApplyMode::Write)?;

    let pre = files_of(&case.pre_tree);
    let post = files_of(&case.post_tree);
    let ours = files_of(work.path());
    let changed: BTreeSet<&PathBuf> = pre
        .keys()
        .chain(post.keys())
        .filter(|p| pre.get(*p) != post.get(*p))
        .collect();
    let excluded: BTreeSet<&PathBuf> = case.excluded_files.iter().collect();

    let mut matched = 0;
    let mut mismatched = Vec::new();
    let mut relevant = 0;
    for path in &changed {
        if excluded.contains(path) {
            continue;
        }
        relevant += 1;
        let (a, b) = (ours.get(*path).map(Vec::as_slice), post.get(*path).map(Vec::as_slice));
        if semantically_equal(path, a, b) {
            matched += 1;
        } else {
            mismatched.push(Mismatch {
                path: (*path).clone(),
                diff: text_diff(path, a, b),
            });
        }
    }
    Ok(ReplicationResult {
        case_id: case.case_id.clone(),
        changed_files: changed.len(),
        excluded_files: changed.iter().filter(|p| excluded.contains(*p)).count(),
        relevant_files: relevant,
        matched,
        mismatched,
        accuracy: (relevant > 0).then(|| matched as f64 / relevant as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub changed_files: usize,
    pub excluded_files: usize,
    pub relevant_files: usize,
    pub matched: usize,
    pub mismatched: usize,
    pub accuracy: Option<f64>,
}

impl Summary {
    pub fn accuracy_percent(&self) -> String {
        match self.accuracy {
            Some(a) => format!("{:.2}%", a * 100.0),
            None => "N/A".to_string(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let rows = [
            ("Total Pull Requests Analyzed", self.cases.to_string()),
            ("Total Files with Dependency Changes", self.changed_files.to_string()),
            ("Files Excluded (e.g., Documentation)", self.excluded_files.to_string()),
            ("**Relevant Files for Comparison**", format!("**{}**", self.relevant_files)),
            ("Files Correctly Replicated", self.matched.to_string()),
            ("Files with Mismatched Output", self.mismatched.to_string()),
            ("**Replication Accuracy**", format!("**{}**", self.accuracy_percent())),
        ];
        let mut out = String::from("| Metric | Value |\n|---|---:|\n");
        for (metric, value) in rows {
            let _ = writeln!(out, "| {metric} | {value} |");
        }
        out
    }
}

pub fn summarize(results: &[ReplicationResult]) -> Summary {
    let relevant: usize = results.iter().map(|r| r.relevant_files).sum();
    let matched: usize = results.iter().map(|r| r.matched).sum();
    Summary {
        cases: results.len(),
        changed_files: results.iter().map(|r| r.changed_files).sum(),
        excluded_files: results.iter().map(|r| r.excluded_files).sum(),
        relevant_files: relevant,
        matched,
        mismatched: results.iter().map(|r| r.mismatched.len()).sum(),
        accuracy: (relevant > 0).then(|| matched as f64 / relevant as f64),
    }
}

/// Per-case results and the summary as one JSON document.
pub fn results_json(results: &[ReplicationResult]) -> String {
    let doc = serde_json::json!({
        "cases": results,
        "summary": summarize(results),
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("results are always serializable");
    out.push('\n');
    out
}
