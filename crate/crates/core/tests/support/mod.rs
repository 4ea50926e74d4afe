//! Input generators and independent oracles shared by the integration tests
//! and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use proptest::sample::{select, subsequence};
use regex::Regex;
use rustpython_parser::lexer::lex;
use rustpython_parser::{Mode, Tok};
use similar::{ChangeTag, TextDiff};

use pytrim_core::model::{FileKind, PackageName};
use pytrim_core::pipeline::{self, Options};
use pytrim_core::resolver_dynamic::Installer;
use pytrim_core::remover::{apply_edits, remove_declaration, remove_imports_from_source, ApplyMode};
use pytrim_core::resolver_static::{static_dependency_set, Project};

/// (raw name, import name). Every raw name normalizes differently and no
/// import name is a prefix of another once separators are considered.
pub const POOL: &[(&str, &str)] = &[
    ("alpha", "alpha"),
    ("Beta-Lib", "beta_lib"),
    ("gamma_pkg", "gamma"),
    ("Delta.Core", "delta"),
    ("six", "six"),
    ("prettytable", "prettytable"),
    ("rich", "rich"),
    ("zope.interface", "zope"),
];

pub fn cases_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

pub fn normalize(name: &str) -> String {
    let sep = Regex::new(r"[-_.]+").unwrap();
    sep.replace_all(&name.to_ascii_lowercase(), "-").into_owned()
}

/// Leading distribution name of a requirement string, normalized.
pub fn requirement_name(s: &str) -> Option<String> {
    let re = Regex::new(r"^\s*([A-Za-z0-9][A-Za-z0-9._-]*)").unwrap();
    re.captures(s).map(|c| normalize(&c[1]))
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: &'static str,
    pub spec: &'static str,
    pub extras: bool,
    pub marker: bool,
    pub comment: bool,
}

impl Entry {
    /// The requirement string; a marker quotes with the opposite of `outer`.
    pub fn requirement_in(&self, outer: char) -> String {
        let mut s = self.name.to_string();
        if self.extras {
            s.push_str("[extra]");
        }
        s.push_str(self.spec);
        if self.marker {
            let q = if outer == '\'' { '"' } else { '\'' };
            s.push_str(&format!("; python_version >= {q}3.8{q}"));
        }
        s
    }

    pub fn requirement(&self) -> String {
        self.requirement_in('"')
    }
}

fn entry() -> impl Strategy<Value = Entry> {
    (
        select(POOL.iter().map(|p| p.0).collect::<Vec<_>>()),
        select(vec!["", ">=1.0", "==2.3.4", "~=0.9", "<3,>=1"]),
        any::<bool>(),
        prop::bool::weighted(0.3),
        prop::bool::weighted(0.3),
    )
        .prop_map(|(name, spec, extras, marker, comment)| Entry {
            name,
            spec,
            extras,
            marker,
            comment,
        })
}

fn entries() -> impl Strategy<Value = Vec<Entry>> {
    (subsequence(POOL.iter().map(|p| p.0).collect::<Vec<_>>(), 0..=POOL.len()), prop::collection::vec(entry(), 8))
        .prop_map(|(names, templates)| {
            names
                .into_iter()
                .zip(templates)
                .map(|(name, t)| Entry { name, ..t })
                .collect()
        })
}

fn target() -> impl Strategy<Value = usize> {
    0..POOL.len()
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub file_name: &'static str,
    pub kind: FileKind,
    pub content: String,
    pub package: &'static str,
    pub import_name: &'static str,
}

fn generated(file_name: &'static str, kind: FileKind, content: String, t: usize) -> Generated {
    Generated {
        file_name,
        kind,
        content,
        package: POOL[t].0,
        import_name: POOL[t].1,
    }
}

pub fn requirements_input() -> impl Strategy<Value = Generated> {
    (entries(), target(), any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(es, t, header, index, crlf)| {
        let nl = if crlf { "\r\n" } else { "\n" };
        let mut out = String::new();
        if header {
            out.push_str(&format!("# pinned by hand{nl}{nl}"));
        }
        if index {
            out.push_str(&format!("--index-url https://pypi.example/simple{nl}-r base.txt{nl}"));
        }
        for e in &es {
            let line = if e.comment {
                format!("{}  # needed{nl}", e.requirement())
            } else {
                format!("{}{nl}", e.requirement())
            };
            out.push_str(&line);
        }
        generated("requirements.txt", FileKind::Requirements, out, t)
    })
}

pub fn toml_input() -> impl Strategy<Value = Generated> {
    (entries(), entries(), target(), 0..3usize, any::<bool>()).prop_map(|(deps, extra, t, style, trailing)| {
        let mut out = String::from("[build-system]\nrequires = [\"setuptools\"]\n\n");
        match style {
            0 => {
                let items: Vec<String> = deps.iter().map(|e| format!("\"{}\"", e.requirement())).collect();
                out.push_str(&format!("[project]\nname = \"demo\"\ndependencies = [{}]\n", items.join(", ")));
            }
            1 => {
                out.push_str("[project]\nname = \"demo\"\ndependencies = [\n");
                for (i, e) in deps.iter().enumerate() {
                    let comma = if i + 1 < deps.len() || trailing { "," } else { "" };
                    let comment = if e.comment { "  # keep" } else { "" };
                    out.push_str(&format!("    \"{}\"{comma}{comment}\n", e.requirement()));
                }
                out.push_str("]\n");
                out.push_str("\n[project.optional-dependencies]\ntest = [\n");
                for e in &extra {
                    out.push_str(&format!("    '{}',\n", e.requirement_in('\'')));
                }
                out.push_str("]\n");
            }
            _ => {
                out.push_str("[tool.poetry]\nname = \"demo\"\nversion = \"0.1.0\"\n\n[tool.poetry.dependencies]\npython = \"^3.9\"\n");
                for e in &deps {
                    let key = e.name;
                    if e.extras {
                        out.push_str(&format!("{key} = {{ version = \"^1.0\", optional = true }}\n"));
                    } else {
                        out.push_str(&format!("{key} = \"^1.0\"\n"));
                    }
                }
                out.push_str("\n[tool.poetry.group.dev.dependencies]\n");
                for e in &extra {
                    out.push_str(&format!("\"{}\" = \"*\"\n", e.name));
                }
            }
        }
        out.push_str("\n[tool.black]\nline-length = 88\n");
        generated("pyproject.toml", FileKind::PyProjectToml, out, t)
    })
}

pub fn setup_cfg_input() -> impl Strategy<Value = Generated> {
    (entries(), entries(), target(), any::<bool>()).prop_map(|(deps, extra, t, tabs)| {
        let indent = if tabs { "\t" } else { "    " };
        let mut out = String::from("[metadata]\nname = demo\nversion = 1.0\n\n[options]\npackages = find:\n");
        if !deps.is_empty() {
            out.push_str("install_requires =\n");
            for e in &deps {
                out.push_str(&format!("{indent}{}\n", e.requirement()));
            }
        }
        out.push_str("python_requires = >=3.8\n");
        if !extra.is_empty() {
            out.push_str("\n[options.extras_require]\ntest =\n");
            for e in &extra {
                out.push_str(&format!("{indent}{}\n", e.requirement()));
            }
        }
        out.push_str("\n[flake8]\nmax-line-length = 100\n");
        generated("setup.cfg", FileKind::SetupCfg, out, t)
    })
}

pub fn setup_py_input() -> impl Strategy<Value = Generated> {
    (entries(), entries(), target(), any::<bool>(), any::<bool>()).prop_map(|(deps, extra, t, multiline, dq)| {
        let q = if dq { '"' } else { '\'' };
        let quote = |e: &Entry| format!("{q}{}{q}", e.requirement_in(q));
        let mut out = String::from("from setuptools import setup, find_packages\n\nsetup(\n    name='demo',\n    version='1.0',\n    packages=find_packages(),\n");
        if multiline {
            out.push_str("    install_requires=[\n");
            for e in &deps {
                let comment = if e.comment { "  # runtime" } else { "" };
                out.push_str(&format!("        {},{comment}\n", quote(e)));
            }
            out.push_str("    ],\n");
        } else {
            let items: Vec<String> = deps.iter().map(quote).collect();
            out.push_str(&format!("    install_requires=[{}],\n", items.join(", ")));
        }
        let items: Vec<String> = extra.iter().map(quote).collect();
        out.push_str(&format!("    extras_require={{'test': [{}]}},\n)\n", items.join(", ")));
        generated("setup.py", FileKind::SetupPy, out, t)
    })
}

pub fn environment_input() -> impl Strategy<Value = Generated> {
    (entries(), entries(), target(), any::<bool>()).prop_map(|(conda, pip, t, channels)| {
        let mut out = String::from("name: demo\n");
        if channels {
            out.push_str("channels:\n  - conda-forge\n");
        }
        out.push_str("dependencies:\n  - python=3.11\n");
        for e in &conda {
            let spec = if e.spec.is_empty() { String::new() } else { "=1.0".into() };
            let comment = if e.comment { "  # conda" } else { "" };
            out.push_str(&format!("  - {}{spec}{comment}\n", e.name.to_ascii_lowercase()));
        }
        if !pip.is_empty() {
            out.push_str("  - pip\n  - pip:\n");
            for e in &pip {
                out.push_str(&format!("      - {}\n", e.requirement()));
            }
        }
        generated("environment.yml", FileKind::YamlEnv, out, t)
    })
}

#[derive(Debug, Clone)]
enum ImportStmt {
    Plain(&'static str),
    Alias(&'static str),
    From(&'static str),
    Sub(&'static str),
    Pair(&'static str),
}

fn import_stmt() -> impl Strategy<Value = ImportStmt> {
    let module = select(POOL.iter().map(|p| p.1).collect::<Vec<_>>());
    (module, 0..5u8).prop_map(|(m, k)| match k {
        0 => ImportStmt::Plain(m),
        1 => ImportStmt::Alias(m),
        2 => ImportStmt::From(m),
        3 => ImportStmt::Sub(m),
        _ => ImportStmt::Pair(m),
    })
}

impl ImportStmt {
    fn render(&self) -> String {
        match self {
            ImportStmt::Plain(m) => format!("import {m}"),
            ImportStmt::Alias(m) => format!("import {m} as _{m}"),
            ImportStmt::From(m) => format!("from {m} import thing, other"),
            ImportStmt::Sub(m) => format!("from {m}.sub import (\n    thing,\n)"),
            ImportStmt::Pair(m) => format!("import os, {m}"),
        }
    }
}

fn indent(text: &str, by: &str) -> String {
    text.lines().map(|l| format!("{by}{l}\n")).collect()
}

pub fn python_input() -> impl Strategy<Value = Generated> {
    (prop::collection::vec((import_stmt(), 0..5u8), 0..8), target()).prop_map(|(stmts, t)| {
        let mut out = String::from("\"\"\"Module.\"\"\"\nimport sys\n");
        for (stmt, place) in &stmts {
            let code = stmt.render();
            match place {
                0 | 1 => out.push_str(&format!("{code}\n")),
                2 => out.push_str(&format!("\ndef f():\n{}", indent(&code, "    "))),
                3 => out.push_str(&format!("\ntry:\n{}except ImportError:\n    pass\n", indent(&code, "    "))),
                _ => out.push_str(&format!("\nif sys.version_info >= (3, 8):\n{}    x = 1\n", indent(&code, "    "))),
            }
        }
        out.push_str("\nprint(sys.argv)\n");
        generated("module.py", FileKind::PythonSource, out, t)
    })
}

pub fn all_formats() -> Vec<(&'static str, BoxedStrategy<Generated>)> {
    vec![
        ("requirements", requirements_input().boxed()),
        ("pyproject.toml", toml_input().boxed()),
        ("setup.cfg", setup_cfg_input().boxed()),
        ("setup.py", setup_py_input().boxed()),
        ("environment.yml", environment_input().boxed()),
        ("python source", python_input().boxed()),
    ]
}

// ---------------------------------------------------------------------------
// Oracles

pub fn remove(g: &Generated, content: &str) -> Result<String, String> {
    if g.kind == FileKind::PythonSource {
        let names = BTreeSet::from([g.import_name.to_string()]);
        return remove_imports_from_source(content, &names).map_err(|e| e.to_string());
    }
    let pkg = PackageName::new(g.package).unwrap();
    remove_declaration(g.kind, content, &pkg, Path::new(g.file_name)).map_err(|e| e.to_string())
}

pub fn check_idempotent(g: &Generated) -> Result<(), String> {
    let once = remove(g, &g.content)?;
    let twice = remove(g, &once)?;
    if once != twice {
        return Err(format!("second application changed the output\n--- once\n{once}\n--- twice\n{twice}"));
    }
    Ok(())
}

/// Reparses `content` with a parser independent of the one under test.
pub fn check_valid(path: &Path, content: &str) -> Result<(), String> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match ext {
        "py" => rustpython_parser::parse(content, Mode::Module, name)
            .map(drop)
            .map_err(|e| format!("{}: {e}", path.display())),
        "toml" => toml::from_str::<toml::Value>(content)
            .map(drop)
            .map_err(|e| format!("{}: {e}", path.display())),
        "yml" | "yaml" => serde_yaml::from_str::<serde_yaml::Value>(content)
            .map(drop)
            .map_err(|e| format!("{}: {e}", path.display())),
        "cfg" | "ini" => {
            let mut ini = configparser::ini::Ini::new_cs();
            ini.set_multiline(true);
            ini.read(content.to_string()).map(drop).map_err(|e| format!("{}: {e}", path.display()))
        }
        "txt" | "in" => {
            for line in content.lines() {
                let line = line.split(" #").next().unwrap_or("").trim();
                if line.is_empty() || line.starts_with('#') || line.starts_with('-') {
                    continue;
                }
                if requirement_name(line).is_none() {
                    return Err(format!("{}: unparseable requirement `{line}`", path.display()));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Top-level modules imported by `source`, read from the token stream.
pub fn imported_modules(source: &str) -> BTreeSet<String> {
    let toks: Vec<Tok> = lex(source, Mode::Module).filter_map(|r| r.ok()).map(|(t, _)| t).collect();
    let mut out = BTreeSet::new();
    let mut i = 0;
    while i < toks.len() {
        match &toks[i] {
            Tok::From => {
                if let Some(Tok::Name { name }) = toks.get(i + 1) {
                    out.insert(name.clone());
                }
            }
            Tok::Import if !matches!(toks.get(i.wrapping_sub(2)), Some(Tok::From) | Some(Tok::Dot)) && !follows_from(&toks, i) => {
                let mut expect_module = true;
                let mut j = i + 1;
                while let Some(t) = toks.get(j) {
                    match t {
                        Tok::Name { name } if expect_module => {
                            out.insert(name.clone());
                            expect_module = false;
                        }
                        Tok::Comma => expect_module = true,
                        Tok::Newline | Tok::Semi => break,
                        _ => {}
                    }
                    j += 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    out
}

/// Whether the `import` at `i` closes a `from x import` clause.
fn follows_from(toks: &[Tok], i: usize) -> bool {
    for t in toks[..i].iter().rev() {
        match t {
            Tok::From => return true,
            Tok::Newline | Tok::Semi | Tok::Indent | Tok::Dedent | Tok::Colon => return false,
            _ => {}
        }
    }
    false
}

/// Declared requirement names, read with independent parsers.
pub fn declared(path: &Path, content: &str) -> BTreeSet<String> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let mut out = BTreeSet::new();
    match ext {
        "txt" | "in" => {
            for line in content.lines() {
                let line = line.split(" #").next().unwrap_or("").trim();
                if !line.starts_with('#') && !line.starts_with('-') {
                    out.extend(requirement_name(line));
                }
            }
        }
        "toml" => {
            let Ok(v) = toml::from_str::<toml::Value>(content) else { return out };
            let mut strings = |arr: Option<&toml::Value>| {
                for s in arr.and_then(|a| a.as_array()).into_iter().flatten() {
                    out.extend(s.as_str().and_then(requirement_name));
                }
            };
            strings(v.get("project").and_then(|p| p.get("dependencies")));
            for table in ["optional-dependencies"] {
                if let Some(t) = v.get("project").and_then(|p| p.get(table)).and_then(|t| t.as_table()) {
                    for arr in t.values() {
                        strings(Some(arr));
                    }
                }
            }
            if let Some(t) = v.get("dependency-groups").and_then(|t| t.as_table()) {
                for arr in t.values() {
                    strings(Some(arr));
                }
            }
            if let Some(poetry) = v.get("tool").and_then(|t| t.get("poetry")) {
                let mut keys = |t: Option<&toml::Value>| {
                    for k in t.and_then(|t| t.as_table()).into_iter().flat_map(|t| t.keys()) {
                        if k != "python" {
                            out.insert(normalize(k));
                        }
                    }
                };
                keys(poetry.get("dependencies"));
                keys(poetry.get("dev-dependencies"));
                if let Some(groups) = poetry.get("group").and_then(|g| g.as_table()) {
                    for g in groups.values() {
                        keys(g.get("dependencies"));
                    }
                }
            }
        }
        "cfg" => {
            let mut ini = configparser::ini::Ini::new_cs();
            ini.set_multiline(true);
            let Ok(map) = ini.read(content.to_string()) else { return out };
            let mut lines = |v: &Option<String>| {
                for l in v.iter().flat_map(|v| v.lines()) {
                    out.extend(requirement_name(l.split('#').next().unwrap_or("")));
                }
            };
            if let Some(opts) = map.get("options") {
                lines(opts.get("install_requires").unwrap_or(&None));
            }
            if let Some(extras) = map.get("options.extras_require") {
                for v in extras.values() {
                    lines(v);
                }
            }
        }
        "py" => {
            for (tok, _) in lex(content, Mode::Module).filter_map(|r| r.ok()) {
                if let Tok::String { value, .. } = tok {
                    if value.contains(' ') && !value.contains(['<', '>', '=']) {
                        continue;
                    }
                    out.extend(requirement_name(&value).filter(|_| !value.contains('/')));
                }
            }
        }
        "yml" | "yaml" => {
            let Ok(v) = serde_yaml::from_str::<serde_yaml::Value>(content) else { return out };
            for item in v.get("dependencies").and_then(|d| d.as_sequence()).into_iter().flatten() {
                match item {
                    serde_yaml::Value::String(s) => out.extend(requirement_name(s)),
                    serde_yaml::Value::Mapping(m) => {
                        for s in m.get("pip").and_then(|p| p.as_sequence()).into_iter().flatten() {
                            out.extend(s.as_str().and_then(requirement_name));
                        }
                    }
                    _ => {}
                }
            }
        }
        _ => {}
    }
    out
}

pub fn check_complete(g: &Generated, output: &str) -> Result<(), String> {
    if g.kind == FileKind::PythonSource {
        let left = imported_modules(output);
        if left.contains(g.import_name) {
            return Err(format!("`{}` still imported:\n{output}", g.import_name));
        }
        return Ok(());
    }
    let left = declared(Path::new(g.file_name), output);
    if left.contains(&normalize(g.package)) {
        return Err(format!("`{}` still declared:\n{output}", g.package));
    }
    Ok(())
}

fn mention_regex(names: &[String]) -> Regex {
    let alternatives: Vec<String> = names
        .iter()
        .map(|n| {
            normalize(n)
                .split('-')
                .map(regex::escape)
                .collect::<Vec<_>>()
                .join("[-_.]+")
        })
        .collect();
    Regex::new(&format!(r"(?i)(?:^|[^A-Za-z0-9_-])(?:{})(?:$|[^A-Za-z0-9_-])", alternatives.join("|"))).unwrap()
}

fn structural(line: &str) -> bool {
    let re = Regex::new(r#"^\s*(?:-\s+)?(?:[\[\](){},]*|["']?[\w.-]+["']?\s*[=:]\s*[\[({]?)\s*(?:#.*)?$"#).unwrap();
    re.is_match(line)
}

fn bracket_balance(line: &str) -> i32 {
    line.chars()
        .map(|c| match c {
            '(' | '[' | '{' => 1,
            ')' | ']' | '}' => -1,
            _ => 0,
        })
        .sum()
}

fn words(line: &str) -> BTreeSet<String> {
    Regex::new(r"[A-Za-z0-9_.-]+")
        .unwrap()
        .find_iter(line)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Every changed region must be explained by the removed names: deleted
/// lines mention one of them (or are bare structure such as a closing
/// bracket or an emptied key), and inserted lines are either `pass` or
/// rewrites built only from words of the lines they replace.
pub fn check_non_interference(original: &str, output: &str, names: &[String]) -> Result<(), String> {
    let mention = mention_regex(names);
    let pass = Regex::new(r"^\s*pass\s*$").unwrap();
    let diff = TextDiff::from_lines(original, output);
    for group in diff.grouped_ops(0) {
        let mut deleted = Vec::new();
        let mut inserted = Vec::new();
        for op in &group {
            for change in diff.iter_changes(op) {
                match change.tag() {
                    ChangeTag::Delete => deleted.push(change.value().to_string()),
                    ChangeTag::Insert => inserted.push(change.value().to_string()),
                    ChangeTag::Equal => {}
                }
            }
        }
        // Continuation lines of a bracket opened on a mentioning line are
        // part of the same statement.
        let mut depth = 0i32;
        for line in &deleted {
            let covered = mention.is_match(line) || depth > 0;
            if !covered && !structural(line) {
                return Err(format!("removed unrelated line {line:?}"));
            }
            if covered {
                depth = (depth + bracket_balance(line)).max(0);
            }
        }
        let available: BTreeSet<String> = deleted.iter().flat_map(|l| words(l)).collect();
        for line in &inserted {
            if pass.is_match(line) {
                continue;
            }
            if mention.is_match(line) {
                return Err(format!("inserted line still mentions a removed name: {line:?}"));
            }
            if !words(line).is_subset(&available) {
                return Err(format!("inserted line {line:?} is not a rewrite of {deleted:?}"));
            }
        }
    }
    Ok(())
}

pub fn check_generated(g: &Generated) -> Result<(), String> {
    let output = remove(g, &g.content)?;
    check_idempotent(g)?;
    check_valid(Path::new(g.file_name), &output)?;
    check_complete(g, &output)?;
    check_non_interference(&g.content, &output, &[g.package.to_string(), g.import_name.to_string()])
}

// ---------------------------------------------------------------------------
// Corpus

pub struct CaseDir {
    pub id: String,
    pub pre: PathBuf,
    pub removed: Vec<String>,
}

pub fn corpus() -> Vec<CaseDir> {
    let mut out = Vec::new();
    let mut dirs: Vec<_> = fs::read_dir(cases_dir()).unwrap().filter_map(|e| e.ok()).map(|e| e.path()).collect();
    dirs.sort();
    for dir in dirs {
        let Ok(text) = fs::read_to_string(dir.join("case.json")) else { continue };
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        out.push(CaseDir {
            id: dir.file_name().unwrap().to_string_lossy().into_owned(),
            pre: dir.join("pre"),
            removed: v["removed"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap().to_string())
                .collect(),
        });
    }
    out
}

pub fn copy_tree(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(from).unwrap();
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).unwrap();
        } else {
            fs::copy(entry.path(), &dest).unwrap();
        }
    }
}

#[derive(Debug, Default)]
pub struct CorpusReport {
    pub edits: usize,
    pub idempotence: Vec<String>,
    pub completeness: Vec<String>,
    pub validity: Vec<String>,
}

/// Runs removal-only mode on a copy of every case and checks the edits.
pub fn check_corpus() -> CorpusReport {
    let mut report = CorpusReport::default();
    for case in corpus() {
        let work = tempfile::tempdir().unwrap();
        copy_tree(&case.pre, work.path());
        let names: Vec<&str> = case.removed.iter().map(String::as_str).collect();
        let options = Options::removal_only(&names);
        let outcome = pipeline::run(work.path(), &options).unwrap();
        apply_edits(work.path(), &outcome.plan, ApplyMode::Write).unwrap();

        let mut mention_names = case.removed.clone();
        for f in &outcome.findings {
            mention_names.extend(f.import_sites.iter().map(|b| b.top_level.clone()));
            mention_names.push(f.package.import_fallback());
        }
        for edit in &outcome.plan.file_edits {
            report.edits += 1;
            let before = String::from_utf8_lossy(&edit.original_content);
            let after = String::from_utf8_lossy(&edit.new_content);
            if let Err(e) = check_valid(&edit.file_path, &after) {
                report.validity.push(format!("{}: {e}", case.id));
            }
            if let Err(e) = check_non_interference(&before, &after, &mention_names) {
                report.completeness.push(format!("{}: {}: {e}", case.id, edit.file_path.display()));
            }
        }

        // Nothing left to find once the edits are on disk.
        let project = Project::new(work.path()).unwrap();
        let statics = static_dependency_set(&project).unwrap();
        let bindings = pytrim_core::detector::scan_imports(work.path(), &statics.discovery.python_sources);
        for name in &case.removed {
            let pkg = PackageName::new(name).unwrap();
            if !statics.locations(&pkg).is_empty() {
                report.completeness.push(format!("{}: `{name}` still declared", case.id));
            }
            let imports = pytrim_core::detector::map_package_to_imports(&pkg, None);
            if bindings.iter().any(|b| imports.contains(&b.top_level)) {
                report.completeness.push(format!("{}: `{name}` still imported", case.id));
            }
        }

        // A second run has nothing to do.
        let again = pipeline::run(work.path(), &options).unwrap();
        if !again.plan.file_edits.is_empty() {
            let files: Vec<String> = again.plan.file_edits.iter().map(|e| e.file_path.display().to_string()).collect();
            report.idempotence.push(format!("{}: second run edits {}", case.id, files.join(", ")));
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Dynamic-resolution fixture

pub fn write(root: &Path, rel: &str, content: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

pub fn pip_available() -> bool {
    std::process::Command::new("pip")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

/// A project whose `setup.py` reads its requirements from `reqs/core.txt`,
/// which names a stand-in `pyrsistent`.
pub fn computed_setup_py_project(dir: &Path) -> PathBuf {
    let project = dir.join("project");
    write(
        &project,
        "setup.py",
        "import os\nfrom setuptools import setup\n\nhere = os.path.dirname(os.path.abspath(__file__))\nwith open(os.path.join(here, 'reqs/core.txt')) as f:\n    REQS = f.read().splitlines()\n\nsetup(name='optisdk', version='1.0', packages=['optisdk'], install_requires=REQS)\n",
    );
    write(&project, "reqs/core.txt", "pyrsistent>=0.16.0\n");
    write(&project, "optisdk/__init__.py", "import json\n");
    project
}

/// An offline pip: a wheel for the stand-in `pyrsistent` is built into
/// `dir/wheels` and the index is disabled.
pub fn offline_pip(dir: &Path) -> Installer {
    let dep = dir.join("dep");
    write(&dep, "setup.py", "from setuptools import setup\nsetup(name='pyrsistent', version='0.20.0', packages=['pyrsistent'])\n");
    write(&dep, "pyrsistent/__init__.py", "");
    let wheels = dir.join("wheels");
    let status = std::process::Command::new("pip")
        .args(["wheel", "--quiet", "--no-deps", "--no-build-isolation", "-w"])
        .arg(&wheels)
        .arg(&dep)
        .env("PIP_NO_INDEX", "1")
        .status()
        .unwrap();
    assert!(status.success(), "building the stand-in wheel failed");
    Installer::parse(&format!(
        "env PIP_NO_INDEX=1 PIP_FIND_LINKS={} PIP_NO_BUILD_ISOLATION=0 PIP_DISABLE_PIP_VERSION_CHECK=1 pip",
        wheels.display()
    ))
    .unwrap()
}

/// A shell installer that lays down the dist-info directories pip would.
pub fn fake_installer(dir: &Path) -> Installer {
    let script = dir.join("fake-pip.sh");
    fs::write(
        &script,
        r#"# usage: install -t TARGET PROJECT
target="$3"
mkdir -p "$target/optisdk-1.0.dist-info" "$target/pyrsistent-0.20.0.dist-info"
printf 'Metadata-Version: 2.1\nName: optisdk\nVersion: 1.0\nRequires-Dist: pyrsistent>=0.16.0\n' > "$target/optisdk-1.0.dist-info/METADATA"
printf 'optisdk\n' > "$target/optisdk-1.0.dist-info/top_level.txt"
printf 'Metadata-Version: 2.1\nName: pyrsistent\nVersion: 0.20.0\n' > "$target/pyrsistent-0.20.0.dist-info/METADATA"
printf 'pyrsistent\n' > "$target/pyrsistent-0.20.0.dist-info/top_level.txt"
"#,
    )
    .unwrap();
    Installer::parse(&format!("sh {}", script.display())).unwrap()
}
