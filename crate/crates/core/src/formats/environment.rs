//! Conda `environment*.yml` files: items of the top-level `dependencies:`
//! sequence, including a nested `- pip:` block.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{normalize_name, parse_requirement_line, Requirement};
use crate::text::{physical_lines, remove_lines};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YamlEntry {
    pub requirement: Requirement,
    /// 0-based physical line.
    pub line: usize,
    pub in_pip_block: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Listing {
    entries: Vec<YamlEntry>,
    /// (line of `- pip:`, item lines in that block)
    pip_blocks: Vec<(usize, Vec<usize>)>,
}

pub fn validate(text: &str, path: &Path) -> Result<serde_yaml::Value> {
    serde_yaml::from_str(text).map_err(|e| Error::YamlSyntax {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['"', '\''] {
        if let Some(inner) = s.strip_prefix(q).and_then(|r| r.strip_suffix(q)) {
            return inner;
        }
    }
    s
}

fn strip_yaml_comment(s: &str) -> &str {
    match s.find(" #") {
        Some(i) => &s[..i],
        None if s.starts_with('#') => "",
        None => s,
    }
}

/// Conda match specs: `numpy`, `numpy=1.2`, `numpy 1.2.*`, `conda-forge::numpy>=1`.
fn parse_conda_spec(item: &str) -> Option<Requirement> {
    let item = item.rsplit("::").next().unwrap_or(item).trim();
    let end = item
        .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')))
        .unwrap_or(item.len());
    let name = normalize_name(&item[..end]).ok()?;
    if matches!(name.normalized(), "python" | "pip") {
        return None;
    }
    Some(Requirement {
        name,
        extras: Default::default(),
        version_constraint: item[end..].trim().to_string(),
        marker: None,
    })
}

fn unsupported(path: &Path, line: usize, reason: &str) -> Error {
    Error::Unsupported {
        path: path.to_path_buf(),
        line: line + 1,
        reason: reason.to_string(),
    }
}

fn listing(text: &str, path: &Path) -> Result<Listing> {
    validate(text, path)?;
    let mut out = Listing::default();
    let lines = physical_lines(text);
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].trim_end_matches(['\n', '\r']);
        i += 1;
        if indent_of(line) != 0 || !line.starts_with("dependencies:") {
            continue;
        }
        let inline = strip_yaml_comment(line["dependencies:".len()..].trim());
        if !inline.is_empty() {
            return Err(unsupported(path, i - 1, "flow-style dependency list"));
        }
        let mut pip: Option<(usize, usize)> = None; // (line, indent)
        while i < lines.len() {
            let raw = lines[i].trim_end_matches(['\n', '\r']);
            let stripped = raw.trim();
            let indent = indent_of(raw);
            if stripped.is_empty() || stripped.starts_with('#') {
                i += 1;
                continue;
            }
            if indent == 0 && !stripped.starts_with("- ") && stripped != "-" {
                break;
            }
            let Some(item) = stripped.strip_prefix('-') else {
                i += 1;
                continue;
            };
            let item = strip_yaml_comment(item.trim());
            if item.contains('&') || item.starts_with('*') || item.contains(" *") {
                return Err(unsupported(path, i, "YAML anchors or aliases"));
            }
            if let Some((_, pip_indent)) = pip {
                if indent <= pip_indent {
                    pip = None;
                }
            }
            if unquote(item) == "pip:" || item.starts_with("pip:") {
                if !item.trim_end().ends_with(':') {
                    return Err(unsupported(path, i, "flow-style pip list"));
                }
                pip = Some((i, indent));
                out.pip_blocks.push((i, Vec::new()));
                i += 1;
                continue;
            }
            let value = unquote(item);
            let requirement = if pip.is_some() {
                out.pip_blocks.last_mut().expect("open pip block").1.push(i);
                parse_requirement_line(value).ok().flatten()
            } else {
                parse_conda_spec(value)
            };
            if let Some(requirement) = requirement {
                out.entries.push(YamlEntry {
                    requirement,
                    line: i,
                    in_pip_block: pip.is_some(),
                });
            }
            i += 1;
        }
    }
    Ok(out)
}

pub fn entries(text: &str, path: &Path) -> Result<Vec<YamlEntry>> {
    Ok(listing(text, path)?.entries)
}

/// Deletes the sequence items naming `pkg`; a `- pip:` block left empty goes
/// with them.
pub fn remove(text: &str, pkg: &crate::model::PackageName, path: &Path) -> Result<String> {
    let listing = listing(text, path)?;
    let doomed: BTreeSet<usize> = listing
        .entries
        .iter()
        .filter(|e| &e.requirement.name == pkg)
        .map(|e| e.line)
        .collect();
    if doomed.is_empty() {
        return Ok(text.to_string());
    }
    let mut all = doomed.clone();
    for (header, items) in &listing.pip_blocks {
        if !items.is_empty() && items.iter().all(|l| doomed.contains(l)) {
            all.insert(*header);
        }
    }
    Ok(remove_lines(text, &all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PackageName;

    const ENV: &str = "name: demo\nchannels:\n  - conda-forge\ndependencies:\n  - python=3.10\n  - numpy>=1.20  # arrays\n  - conda-forge::prettytable 3.*\n  - pip\n  - pip:\n    - rich==14.0.0\n    - prettytable\nvariables:\n  X: 1\n";

    fn rm(text: &str, name: &str) -> String {
        remove(text, &PackageName::new(name).unwrap(), Path::new("environment.yml")).unwrap()
    }

    fn deps(value: &serde_yaml::Value) -> Vec<String> {
        let mut out = Vec::new();
        for item in value["dependencies"].as_sequence().unwrap() {
            match item {
                serde_yaml::Value::String(s) => out.push(s.clone()),
                serde_yaml::Value::Mapping(m) => {
                    for v in m.values().flat_map(|v| v.as_sequence().unwrap()) {
                        out.push(format!("pip:{}", v.as_str().unwrap()));
                    }
                }
                _ => {}
            }
        }
        out
    }

    #[test]
    fn lists_conda_and_pip_entries() {
        let e = entries(ENV, Path::new("environment.yml")).unwrap();
        let names: Vec<_> = e.iter().map(|e| e.requirement.name.normalized()).collect();
        assert_eq!(names, ["numpy", "prettytable", "rich", "prettytable"]);
        assert!(e[2].in_pip_block);
        assert_eq!(e[1].line, 6);
    }

    #[test]
    fn removal_matches_yaml_oracle() {
        let out = rm(ENV, "prettytable");
        let before = deps(&validate(ENV, Path::new("e")).unwrap());
        let after = deps(&validate(&out, Path::new("e")).unwrap());
        let expected: Vec<_> = before
            .into_iter()
            .filter(|d| !d.contains("prettytable"))
            .collect();
        assert_eq!(after, expected);
        assert!(out.contains("variables:\n  X: 1\n"));
    }

    #[test]
    fn emptied_pip_block_removed() {
        let text = "dependencies:\n  - numpy\n  - pip:\n    - rich\n";
        assert_eq!(rm(text, "rich"), "dependencies:\n  - numpy\n");
    }

    #[test]
    fn anchors_are_unsupported() {
        let text = "base: &base numpy\ndependencies:\n  - *base\n  - rich\n";
        let err = remove(text, &PackageName::new("rich").unwrap(), Path::new("e")).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }
}
