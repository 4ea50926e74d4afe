//! `pyproject.toml`: PEP 621 arrays, dependency groups and Poetry tables.
//!
//! Edits are computed from the spans of a parsed [`toml_edit::Document`] and
//! applied as text splices, so every untouched byte survives.

use std::ops::Range;
use std::path::Path;

use toml_edit::{Document, Item, TableLike, Value};

use crate::error::{Error, Result};
use crate::model::{parse_requirement_line, PackageName, Requirement};
use crate::text::{apply_splices, excise_list_item, LineIndex};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Site {
    ArrayElement {
        element: Range<usize>,
        array_len: usize,
        /// `key = [...]` span, removed when the array would become empty.
        owner: Option<Range<usize>>,
    },
    KeyValue {
        span: Range<usize>,
    },
    Unsupported {
        reason: &'static str,
    },
}

/// One dependency declaration inside a pyproject file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TomlEntry {
    pub requirement: Requirement,
    pub line: usize,
    /// Dotted path of the containing table or array, e.g.
    /// `project.optional-dependencies.dev`.
    pub table_path: String,
    site: Site,
}

fn syntax_error(path: &Path, err: toml_edit::TomlError) -> Error {
    Error::TomlSyntax {
        path: path.to_path_buf(),
        message: err.to_string().trim().to_string(),
    }
}

fn nested<'a>(root: &'a dyn TableLike, path: &[&str]) -> Option<&'a dyn TableLike> {
    let mut current = root;
    for key in path {
        current = current.get(key)?.as_table_like()?;
    }
    Some(current)
}

struct Collector {
    lines: LineIndex,
    entries: Vec<TomlEntry>,
}

impl Collector {
    fn line(&self, offset: usize) -> usize {
        self.lines.line_of(offset)
    }

    fn array(&mut self, table: &dyn TableLike, key: &str, table_path: String, removable_owner: bool) {
        let Some((k, item)) = table.get_key_value(key) else {
            return;
        };
        let Some(array) = item.as_array() else {
            return;
        };
        let owner = match (removable_owner, k.span(), item.span()) {
            (true, Some(ks), Some(vs)) => Some(ks.start..vs.end),
            _ => None,
        };
        for value in array.iter() {
            let Value::String(s) = value else { continue };
            let Some(span) = value.span() else { continue };
            let Ok(Some(requirement)) = parse_requirement_line(s.value()) else {
                continue;
            };
            let line = self.line(span.start);
            self.entries.push(TomlEntry {
                requirement,
                line,
                table_path: table_path.clone(),
                site: Site::ArrayElement {
                    element: span,
                    array_len: array.len(),
                    owner: owner.clone(),
                },
            });
        }
    }

    fn poetry_table(&mut self, table: &dyn TableLike, table_path: String) {
        for (key, _) in table.iter() {
            if key.eq_ignore_ascii_case("python") {
                continue;
            }
            let Ok(name) = PackageName::new(key) else { continue };
            let requirement = Requirement {
                name,
                extras: Default::default(),
                version_constraint: String::new(),
                marker: None,
            };
            let Some((k, item)) = table.get_key_value(key) else { continue };
            let key_span = k.span();
            let (site, line) = match (item, key_span, item.span()) {
                (Item::Value(_), Some(ks), Some(vs)) => {
                    (Site::KeyValue { span: ks.start..vs.end }, self.line(ks.start))
                }
                (_, ks, vs) => {
                    let offset = ks.or(vs).map_or(0, |r| r.start);
                    (
                        Site::Unsupported {
                            reason: "dependency declared as a table; edit it by hand",
                        },
                        self.line(offset),
                    )
                }
            };
            self.entries.push(TomlEntry {
                requirement,
                line,
                table_path: table_path.clone(),
                site,
            });
        }
    }
}

/// Every dependency declaration in the document, in document order within
/// each table.
pub fn entries(text: &str, path: &Path) -> Result<Vec<TomlEntry>> {
    let doc = Document::parse(text).map_err(|e| syntax_error(path, e))?;
    let root: &dyn TableLike = doc.as_table();
    let mut c = Collector {
        lines: LineIndex::new(text),
        entries: Vec::new(),
    };

    if let Some(project) = nested(root, &["project"]) {
        c.array(project, "dependencies", "project.dependencies".into(), false);
        if let Some(optional) = nested(project, &["optional-dependencies"]) {
            for (group, _) in optional.iter() {
                c.array(
                    optional,
                    group,
                    format!("project.optional-dependencies.{group}"),
                    true,
                );
            }
        }
    }
    if let Some(groups) = nested(root, &["dependency-groups"]) {
        for (group, _) in groups.iter() {
            c.array(groups, group, format!("dependency-groups.{group}"), true);
        }
    }
    if let Some(poetry) = nested(root, &["tool", "poetry"]) {
        for table in ["dependencies", "dev-dependencies"] {
            if let Some(deps) = nested(poetry, &[table]) {
                c.poetry_table(deps, format!("tool.poetry.{table}"));
            }
        }
        if let Some(groups) = nested(poetry, &["group"]) {
            for (group, _) in groups.iter() {
                if let Some(deps) = nested(groups, &[group, "dependencies"]) {
                    c.poetry_table(deps, format!("tool.poetry.group.{group}.dependencies"));
                }
            }
        }
        if let Some(extras) = nested(poetry, &["extras"]) {
            for (extra, _) in extras.iter() {
                c.array(extras, extra, format!("tool.poetry.extras.{extra}"), true);
            }
        }
    }
    Ok(c.entries)
}

/// `project.name`, or `tool.poetry.name`.
pub fn project_name(text: &str) -> Option<String> {
    let doc = Document::parse(text).ok()?;
    let root: &dyn TableLike = doc.as_table();
    [&["project"][..], &["tool", "poetry"][..]]
        .iter()
        .find_map(|path| nested(root, path)?.get("name")?.as_str().map(str::to_string))
}

/// Removes every declaration of `pkg`. Untouched lines are byte-identical.
/// An optional-dependency group left empty is removed; `project.dependencies`
/// keeps its empty array.
pub fn remove(text: &str, pkg: &PackageName, path: &Path) -> Result<String> {
    let mut current = text.to_string();
    // Each pass removes one entry and re-parses, so spans stay valid.
    for _ in 0..=text.len() {
        let found = entries(&current, path)?
            .into_iter()
            .find(|e| &e.requirement.name == pkg);
        let Some(entry) = found else {
            return Ok(current);
        };
        let splice = match entry.site {
            Site::ArrayElement {
                owner: Some(owner),
                array_len: 1,
                ..
            } => excise_list_item(&current, owner.start, owner.end),
            Site::ArrayElement { element, .. } => {
                excise_list_item(&current, element.start, element.end)
            }
            Site::KeyValue { span } => excise_list_item(&current, span.start, span.end),
            Site::Unsupported { reason } => {
                return Err(Error::Unsupported {
                    path: path.to_path_buf(),
                    line: entry.line,
                    reason: reason.to_string(),
                })
            }
        };
        current = apply_splices(&current, vec![splice]);
    }
    Ok(current)
}
