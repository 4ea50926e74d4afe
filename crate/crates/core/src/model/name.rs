use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identity of a distribution as written in a manifest, plus its normalized
/// form. Equality, ordering and hashing only look at the normalized form, so
/// `Flask_Login` in `setup.py` and `flask-login` in `requirements.txt` are the
/// same package.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackageName {
    raw: String,
    normalized: String,
}

impl PackageName {
    pub fn new(raw: &str) -> Result<Self> {
        normalize_name(raw)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    /// Fallback import name: `my-lib` imports as `my_lib`.
    pub fn import_fallback(&self) -> String {
        self.normalized.replace('-', "_")
    }
}

fn is_separator(c: char) -> bool {
    matches!(c, '-' | '_' | '.')
}

/// Lowercases `raw` and collapses every run of `-`, `_` and `.` into one `-`.
pub fn normalize_name(raw: &str) -> Result<PackageName> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::EmptyName);
    }
    if !trimmed
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || is_separator(c))
    {
        return Err(Error::InvalidName(trimmed.to_string()));
    }
    let first = trimmed.chars().next().unwrap();
    let last = trimmed.chars().next_back().unwrap();
    if is_separator(first) || is_separator(last) {
        return Err(Error::InvalidName(trimmed.to_string()));
    }

    let mut normalized = String::with_capacity(trimmed.len());
    let mut in_run = false;
    for c in trimmed.chars() {
        if is_separator(c) {
            if !in_run {
                normalized.push('-');
            }
            in_run = true;
        } else {
            normalized.push(c.to_ascii_lowercase());
            in_run = false;
        }
    }
    Ok(PackageName {
        raw: trimmed.to_string(),
        normalized,
    })
}

impl PartialEq for PackageName {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for PackageName {}

impl Hash for PackageName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl PartialOrd for PackageName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PackageName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl fmt::Display for PackageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)
    }
}
