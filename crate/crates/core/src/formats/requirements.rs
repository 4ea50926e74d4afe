//! pip requirements files (`requirements*.txt`, `*.in`).

use std::collections::BTreeSet;
use std::path::Path;

use log::warn;

use crate::model::{parse_requirement_line, FileKind, PackageName, RequirementSpec, SourceLocation};
use crate::text::{physical_lines, remove_lines};

/// A backslash-joined logical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLine {
    /// 0-based index of the first physical line.
    pub first: usize,
    /// 0-based index of the last physical line.
    pub last: usize,
    pub content: String,
}

pub fn logical_lines(text: &str) -> Vec<LogicalLine> {
    let mut out = Vec::new();
    let mut current: Option<LogicalLine> = None;
    for (i, raw) in physical_lines(text).into_iter().enumerate() {
        let line = raw.trim_end_matches('\n').trim_end_matches('\r');
        let (body, continued) = match line.strip_suffix('\\') {
            Some(body) => (body, true),
            None => (line, false),
        };
        let entry = current.get_or_insert_with(|| LogicalLine {
            first: i,
            last: i,
            content: String::new(),
        });
        entry.last = i;
        entry.content.push_str(body);
        if !continued {
            out.extend(current.take());
        }
    }
    out.extend(current);
    out
}

/// Everything extracted from one requirements file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequirementsFile {
    pub specs: Vec<RequirementSpec>,
    /// Targets of `-r` / `--requirement` options, verbatim.
    pub includes: Vec<String>,
    pub warnings: Vec<String>,
}

fn include_target(line: &str) -> Option<&str> {
    let line = line.trim();
    let rest = line
        .strip_prefix("--requirement")
        .or_else(|| line.strip_prefix("-r"))?;
    let rest = rest.strip_prefix('=').unwrap_or(rest).trim();
    let target = rest.split_whitespace().next()?;
    Some(target)
}

pub fn parse(text: &str, path: &Path) -> RequirementsFile {
    let mut file = RequirementsFile::default();
    for logical in logical_lines(text) {
        if let Some(target) = include_target(&logical.content) {
            file.includes.push(target.to_string());
            continue;
        }
        match parse_requirement_line(&logical.content) {
            Ok(Some(requirement)) => file.specs.push(RequirementSpec {
                requirement,
                location: SourceLocation::new(path, logical.first + 1, FileKind::Requirements),
            }),
            Ok(None) => {}
            Err(e) => {
                let msg = format!("{}:{}: skipping line: {e}", path.display(), logical.first + 1);
                warn!("{msg}");
                file.warnings.push(msg);
            }
        }
    }
    file
}

/// Deletes every logical line declaring `pkg`, including its continuation
/// lines and trailing comment. All other bytes are kept.
pub fn remove(text: &str, pkg: &PackageName) -> String {
    let mut doomed = BTreeSet::new();
    for logical in logical_lines(text) {
        if let Ok(Some(req)) = parse_requirement_line(&logical.content) {
            if &req.name == pkg {
                doomed.extend(logical.first..=logical.last);
            }
        }
    }
    remove_lines(text, &doomed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_name;

    fn names(text: &str) -> Vec<String> {
        parse(text, Path::new("requirements.txt"))
            .specs
            .iter()
            .map(|s| s.name().normalized().to_string())
            .collect()
    }

    const FIG_1B: &str = "prettytable\nclick\nrich==14.0.0\n";

    #[test]
    fn parses_listing() {
        assert_eq!(names(FIG_1B), ["prettytable", "click", "rich"]);
        assert!(names("").is_empty());
        let file = parse(FIG_1B, Path::new("tools/requirements.txt"));
        assert_eq!(file.specs[2].location.line, 3);
        assert_eq!(file.specs[2].requirement.version_constraint, "==14.0.0");
    }

    // pip's own reader turns "foo \\\n ==1.2" into "foo  ==1.2" at line 1.
    #[test]
    fn continuation_lines() {
        let file = parse("foo \\\n ==1.2\n", Path::new("r.txt"));
        assert_eq!(file.specs.len(), 1);
        assert_eq!(file.specs[0].name().normalized(), "foo");
        assert_eq!(file.specs[0].requirement.version_constraint, "==1.2");
        assert_eq!(file.specs[0].location.line, 1);
    }

    #[test]
    fn includes_and_malformed_lines() {
        let file = parse("-r base.txt\n--requirement=dev.txt\n-c constraints.txt\n???\nrich\n", Path::new("r.txt"));
        assert_eq!(file.includes, ["base.txt", "dev.txt"]);
        assert_eq!(file.warnings.len(), 1);
        assert_eq!(file.specs.len(), 1);
    }

    #[test]
    fn removal_keeps_other_bytes() {
        let pkg = normalize_name("prettytable").unwrap();
        assert_eq!(remove(FIG_1B, &pkg), "click\nrich==14.0.0\n");
        assert_eq!(remove("click\n", &pkg), "click\n");
        let text = "# tools\n\nPrettyTable[x]==1.0  # pinned\r\n-r base.txt\nrich \\\n  >=1\n";
        assert_eq!(remove(text, &pkg), "# tools\n\n-r base.txt\nrich \\\n  >=1\n");
        let rich = normalize_name("rich").unwrap();
        assert_eq!(remove(text, &rich), "# tools\n\nPrettyTable[x]==1.0  # pinned\r\n-r base.txt\n");
        assert_eq!(remove("a\nprettytable", &pkg), "a");
    }
}
