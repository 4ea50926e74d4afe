use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("package name is empty")]
    EmptyName,

    #[error("invalid package name `{0}`")]
    InvalidName(String),

    #[error("malformed requirement `{line}`: {reason}")]
    MalformedRequirement { line: String, reason: String },

    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),

    #[error("TOML syntax error in {path}: {message}")]
    TomlSyntax { path: PathBuf, message: String },

    #[error("INI syntax error in {path} at line {line}: {message}")]
    IniSyntax {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("YAML syntax error in {path}: {message}")]
    YamlSyntax { path: PathBuf, message: String },

    #[error("Python syntax error in {path}: {message}")]
    PySyntax { path: PathBuf, message: String },

    #[error("{path}:{line}: cannot edit automatically: {reason}")]
    Unsupported {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("installer `{0}` not found")]
    InstallerNotFound(String),

    #[error("installation failed: {0}")]
    InstallFailed(String),

    #[error("installer timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("malformed metadata in {path}: {reason}")]
    MalformedMetadata { path: PathBuf, reason: String },

    #[error("dependency graph has multiple root candidates: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),

    #[error("dependency graph has no root vertex")]
    MissingRoot,

    #[error("dependency graph has no records")]
    EmptyGraph,

    #[error("{0} changed on disk since the edit plan was computed")]
    StaleFile(PathBuf),

    #[error("{0} is not inside a git work tree")]
    NotARepo(PathBuf),

    #[error("uncommitted changes in files affected by the plan: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    DirtyWorktree(Vec<PathBuf>),

    #[error("`git {command}` failed: {stderr}")]
    VcsCommandFailed { command: String, stderr: String },

    #[error("invalid case {case}: {reason}")]
    CaseSetup { case: String, reason: String },

    #[error("invalid exclude pattern: {0}")]
    Glob(#[from] globset::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
