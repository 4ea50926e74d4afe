//! `setup.cfg` in configparser dialect: `[section]` headers, `key = value`
//! or `key: value` entries, indented continuation lines, full-line `#`/`;`
//! comments.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::model::{parse_requirement_line, FileKind, PackageName, RequirementSpec, SourceLocation};
use crate::text::{physical_lines, remove_lines};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IniValueLine {
    /// 0-based physical line.
    pub line: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IniEntry {
    pub section: String,
    pub key: String,
    /// 0-based physical line of `key = ...`.
    pub key_line: usize,
    /// Byte length of `key =` on the key line, delimiter included.
    key_prefix_len: usize,
    /// The inline value (on the key line) followed by continuation values.
    pub values: Vec<IniValueLine>,
}

fn is_comment(stripped: &str) -> bool {
    stripped.starts_with('#') || stripped.starts_with(';')
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

pub fn parse_ini(text: &str, path: &Path) -> Result<Vec<IniEntry>> {
    let mut entries: Vec<IniEntry> = Vec::new();
    let mut section: Option<String> = None;
    let mut key_indent = 0;
    let mut in_entry = false;

    let err = |line: usize, message: &str| Error::IniSyntax {
        path: path.to_path_buf(),
        line: line + 1,
        message: message.to_string(),
    };

    for (i, raw) in physical_lines(text).into_iter().enumerate() {
        let line = raw.trim_end_matches(['\n', '\r']);
        let stripped = line.trim();
        if stripped.is_empty() || is_comment(stripped) {
            continue;
        }
        let indent = indent_of(line);
        if in_entry && indent > key_indent {
            let entry = entries.last_mut().expect("in_entry implies an entry");
            entry.values.push(IniValueLine {
                line: i,
                value: stripped.to_string(),
            });
            continue;
        }
        if stripped.starts_with('[') {
            let Some(name) = stripped.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
                return Err(err(i, "unterminated section header"));
            };
            section = Some(name.trim().to_string());
            in_entry = false;
            continue;
        }
        let Some(current) = &section else {
            return Err(err(i, "entry before the first section header"));
        };
        let Some(delim) = line.find(['=', ':']) else {
            return Err(err(i, "expected `key = value`"));
        };
        let key = line[..delim].trim();
        if key.is_empty() {
            return Err(err(i, "empty key"));
        }
        let inline = line[delim + 1..].trim();
        let mut values = Vec::new();
        if !inline.is_empty() {
            values.push(IniValueLine {
                line: i,
                value: inline.to_string(),
            });
        }
        entries.push(IniEntry {
            section: current.clone(),
            key: key.to_string(),
            key_line: i,
            key_prefix_len: delim + 1,
            values,
        });
        key_indent = indent;
        in_entry = true;
    }
    Ok(entries)
}

/// Section -> key -> non-empty values, for semantic comparison.
pub fn parse_ini_map(text: &str, path: &Path) -> Result<BTreeMap<String, BTreeMap<String, Vec<String>>>> {
    let mut map: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for entry in parse_ini(text, path)? {
        map.entry(entry.section)
            .or_default()
            .insert(entry.key, entry.values.into_iter().map(|v| v.value).collect());
    }
    Ok(map)
}

fn is_dependency_entry(entry: &IniEntry) -> bool {
    (entry.section == "options" && entry.key == "install_requires")
        || entry.section == "options.extras_require"
}

fn entry_detail(entry: &IniEntry) -> String {
    if entry.section == "options" {
        "options.install_requires".to_string()
    } else {
        format!("options.extras_require.{}", entry.key)
    }
}

/// Dependency declarations from `install_requires` and every
/// `[options.extras_require]` group.
pub fn parse(text: &str, path: &Path) -> Result<Vec<RequirementSpec>> {
    let mut specs = Vec::new();
    for entry in parse_ini(text, path)?.iter().filter(|e| is_dependency_entry(e)) {
        for value in &entry.values {
            match parse_requirement_line(&value.value) {
                Ok(Some(requirement)) => specs.push(RequirementSpec {
                    requirement,
                    location: SourceLocation::new(path, value.line + 1, FileKind::SetupCfg)
                        .with_detail(entry_detail(entry)),
                }),
                Ok(None) => {}
                Err(e) => warn!("{}:{}: skipping value: {e}", path.display(), value.line + 1),
            }
        }
    }
    Ok(specs)
}

/// `[metadata] name`.
pub fn project_name(text: &str) -> Option<String> {
    parse_ini(text, Path::new("setup.cfg"))
        .ok()?
        .into_iter()
        .find(|e| e.section == "metadata" && e.key == "name")
        .and_then(|e| e.values.into_iter().next())
        .map(|v| v.value)
}

/// Deletes the value lines declaring `pkg`. A key left without values is
/// removed along with its line.
pub fn remove(text: &str, pkg: &PackageName, path: &Path) -> Result<String> {
    let entries = parse_ini(text, path)?;
    let lines = physical_lines(text);
    let mut doomed = BTreeSet::new();
    let mut rewritten: BTreeMap<usize, String> = BTreeMap::new();

    for entry in entries.iter().filter(|e| is_dependency_entry(e)) {
        let matches = |v: &IniValueLine| {
            matches!(parse_requirement_line(&v.value), Ok(Some(r)) if &r.name == pkg)
        };
        let hits: Vec<&IniValueLine> = entry.values.iter().filter(|v| matches(v)).collect();
        if hits.is_empty() {
            continue;
        }
        let survivors = entry
            .values
            .iter()
            .filter(|v| !matches(v) && !matches!(parse_requirement_line(&v.value), Ok(None)))
            .count();
        if survivors == 0 {
            doomed.insert(entry.key_line);
            doomed.extend(entry.values.iter().map(|v| v.line));
            continue;
        }
        for hit in hits {
            if hit.line == entry.key_line {
                let line = lines[hit.line];
                let eol_start = line.trim_end_matches(['\n', '\r']).len();
                let mut new_line = line[..entry.key_prefix_len].trim_end().to_string();
                new_line.push_str(&line[eol_start..]);
                rewritten.insert(hit.line, new_line);
            } else {
                doomed.insert(hit.line);
            }
        }
    }

    if rewritten.is_empty() {
        return Ok(remove_lines(text, &doomed));
    }
    let patched: String = lines
        .iter()
        .enumerate()
        .map(|(i, l)| rewritten.get(&i).map_or(*l, String::as_str))
        .collect();
    Ok(remove_lines(&patched, &doomed))
}
