use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::name::{normalize_name, PackageName};
use super::SourceLocation;
use crate::error::{Error, Result};

/// One dependency declaration: `name[extras] constraint ; marker`.
///
/// Only identity matters for removal, so the constraint and marker are kept
/// verbatim and never evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub name: PackageName,
    pub extras: BTreeSet<String>,
    pub version_constraint: String,
    pub marker: Option<String>,
}

/// A [`Requirement`] anchored to where it was declared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSpec {
    #[serde(flatten)]
    pub requirement: Requirement,
    pub location: SourceLocation,
}

impl RequirementSpec {
    pub fn name(&self) -> &PackageName {
        &self.requirement.name
    }
}

impl Requirement {
    /// True when the marker is conditioned on an extra (`extra == "socks"`).
    pub fn is_extra_conditioned(&self) -> bool {
        self.marker.as_deref().is_some_and(marker_mentions_extra)
    }

    /// Extra names the marker is conditioned on.
    pub fn marker_extras(&self) -> Vec<String> {
        let Some(marker) = self.marker.as_deref() else {
            return Vec::new();
        };
        extra_marker_regex()
            .captures_iter(marker)
            .map(|c| c[1].to_string())
            .collect()
    }
}

fn extra_marker_regex() -> &'static regex::Regex {
    static RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| {
        regex::Regex::new(r#"\bextra\s*==\s*["']([^"']*)["']"#).expect("valid regex")
    })
}

fn marker_mentions_extra(marker: &str) -> bool {
    static RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| regex::Regex::new(r"\bextra\b").expect("valid regex"))
        .is_match(marker)
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.raw())?;
        if !self.extras.is_empty() {
            let extras: Vec<&str> = self.extras.iter().map(String::as_str).collect();
            write!(f, "[{}]", extras.join(","))?;
        }
        if self.version_constraint.starts_with('@') {
            write!(f, " {}", self.version_constraint)?;
        } else {
            f.write_str(&self.version_constraint)?;
        }
        if let Some(marker) = &self.marker {
            write!(f, " ; {marker}")?;
        }
        Ok(())
    }
}

fn malformed(line: &str, reason: &str) -> Error {
    Error::MalformedRequirement {
        line: line.to_string(),
        reason: reason.to_string(),
    }
}

/// Strips a trailing `#` comment. A `#` only starts a comment at the start of
/// the line or after whitespace, so URL fragments survive.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut prev_ws = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_ws {
            return &line[..i];
        }
        prev_ws = c.is_whitespace();
    }
    line
}

/// Removes per-requirement options such as `--hash=...` that pip allows after
/// the specifier.
fn strip_trailing_options(line: &str) -> &str {
    let bytes = line.as_bytes();
    for i in 1..bytes.len() {
        if bytes[i] == b'-' && bytes[i - 1].is_ascii_whitespace() && line[i..].starts_with("--")
        {
            return &line[..i];
        }
    }
    line
}

/// Parses one line of a requirements file.
///
/// Returns `Ok(None)` for blank lines, comment lines and option lines
/// (`-r`, `-e`, `--hash`, ...).
pub fn parse_requirement_line(line: &str) -> Result<Option<Requirement>> {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('-') {
        return Ok(None);
    }
    let body = strip_trailing_options(strip_comment(trimmed)).trim();
    if body.is_empty() {
        return Ok(None);
    }

    let name_end = body
        .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')))
        .unwrap_or(body.len());
    if name_end == 0 {
        return Err(malformed(line, "missing package name"));
    }
    let name = normalize_name(&body[..name_end]).map_err(|e| malformed(line, &e.to_string()))?;
    let mut rest = body[name_end..].trim_start();

    let mut extras = BTreeSet::new();
    if let Some(after) = rest.strip_prefix('[') {
        let close = after
            .find(']')
            .ok_or_else(|| malformed(line, "unterminated extras"))?;
        for extra in after[..close].split(',') {
            let extra = extra.trim();
            if extra.is_empty() {
                continue;
            }
            if !extra
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            {
                return Err(malformed(line, "invalid extra name"));
            }
            extras.insert(extra.to_string());
        }
        rest = after[close + 1..].trim_start();
    }

    let (constraint, marker) = if rest.starts_with('@') {
        // URL requirements need whitespace before the marker separator.
        match rest.find(" ;").or_else(|| rest.find("\t;")) {
            Some(i) => (rest[..i].trim(), Some(rest[i..].trim_start()[1..].trim())),
            None => (rest.trim(), None),
        }
    } else {
        match rest.find(';') {
            Some(i) => (rest[..i].trim(), Some(rest[i + 1..].trim())),
            None => (rest.trim(), None),
        }
    };

    if let Some(first) = constraint.chars().next() {
        if !matches!(first, '=' | '<' | '>' | '!' | '~' | '(' | '@') {
            return Err(malformed(line, "unexpected text after package name"));
        }
    }
    let marker = match marker {
        Some("") => return Err(malformed(line, "empty environment marker")),
        Some(m) => Some(m.to_string()),
        None => None,
    };

    Ok(Some(Requirement {
        name,
        extras,
        version_constraint: constraint.to_string(),
        marker,
    }))
}
