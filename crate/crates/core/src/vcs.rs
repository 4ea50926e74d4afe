//! Branch and commit creation through the `git` CLI, plus the pull-request
//! title and body handed to the operator.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::model::{EditPlan, PackageName};
use crate::remover::{apply_edits, ApplyMode};

pub const ARTIFACT_DIR: &str = ".pytrim";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRef {
    pub branch: String,
    pub commit: String,
    pub pr_title: String,
    pub pr_body_path: PathBuf,
}

pub fn pr_title(packages: &[PackageName]) -> String {
    let names: Vec<&str> = packages.iter().map(|p| p.normalized()).collect();
    format!("Remove unused dependencies: {}", names.join(", "))
}

/// `pytrim/remove-<names>-<YYYYMMDD>`.
pub fn default_branch_name(packages: &[PackageName], date: chrono::NaiveDate) -> String {
    let names: Vec<&str> = packages.iter().map(|p| p.normalized()).collect();
    format!("pytrim/remove-{}-{}", names.join("-"), date.format("%Y%m%d"))
}

/// [`default_branch_name`] for today's local date.
pub fn todays_branch_name(packages: &[PackageName]) -> String {
    default_branch_name(packages, chrono::Local::now().date_naive())
}

fn git(root: &Path, args: &[&str]) -> Result<String> {
    let output = Command::new("git")
        .arg("-C")
        .arg(root)
        .args(args)
        .output()
        .map_err(|e| Error::io("git", e))?;
    if !output.status.success() {
        return Err(Error::VcsCommandFailed {
            command: format!("git {}", args.join(" ")),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(String::from_utf8_lossy(&output.stdout).trim_end().to_string())
}

fn restore(root: &Path, plan: &EditPlan, original_branch: &str, branch: &str) {
    for edit in &plan.file_edits {
        if let Err(e) = fs::write(root.join(&edit.file_path), &edit.original_content) {
            warn!("could not restore {}: {e}", edit.file_path.display());
        }
    }
    let _ = git(root, &["reset", "--quiet"]);
    if let Err(e) = git(root, &["checkout", "--quiet", original_branch]) {
        warn!("could not return to {original_branch}: {e}");
    }
    let _ = git(root, &["branch", "-D", branch]);
}

/// Creates `branch`, writes the plan's edits, stages exactly those files and
/// commits them. An empty plan is a no-op. On failure the original branch
/// and file contents are restored.
pub fn create_branch_commit(
    project_root: &Path,
    plan: &EditPlan,
    branch: &str,
    message: &str,
    title: &str,
    body: &str,
) -> Result<Option<CommitRef>> {
    if plan.file_edits.is_empty() {
        return Ok(None);
    }
    if git(project_root, &["rev-parse", "--is-inside-work-tree"]).is_err() {
        return Err(Error::NotARepo(project_root.to_path_buf()));
    }
    let paths: Vec<String> = plan
        .file_edits
        .iter()
        .map(|e| e.file_path.to_string_lossy().into_owned())
        .collect();
    let mut status_args = vec!["status", "--porcelain", "--"];
    status_args.extend(paths.iter().map(String::as_str));
    let dirty = git(project_root, &status_args)?;
    if !dirty.is_empty() {
        let dirty_paths = dirty
            .lines()
            .filter_map(|l| l.get(3..))
            .map(PathBuf::from)
            .collect();
        return Err(Error::DirtyWorktree(dirty_paths));
    }

    let original_branch = git(project_root, &["rev-parse", "--abbrev-ref", "HEAD"])?;
    git(project_root, &["checkout", "--quiet", "-b", branch])?;

    let attempt = || -> Result<String> {
        apply_edits(project_root, plan, ApplyMode::Write)?;
        let mut add_args = vec!["add", "--"];
        add_args.extend(paths.iter().map(String::as_str));
        git(project_root, &add_args)?;
        git(project_root, &["commit", "--quiet", "-m", message])?;
        git(project_root, &["rev-parse", "HEAD"])
    };
    let commit = match attempt() {
        Ok(commit) => commit,
        Err(e) => {
            restore(project_root, plan, &original_branch, branch);
            return Err(e);
        }
    };

    let dir = project_root.join(ARTIFACT_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let body_path = dir.join("pr_body.md");
    fs::write(&body_path, body).map_err(|e| Error::io(&body_path, e))?;
    let title_path = dir.join("pr_title.txt");
    fs::write(&title_path, format!("{title}\n")).map_err(|e| Error::io(&title_path, e))?;
    info!("committed {commit} on {branch}");
    Ok(Some(CommitRef {
        branch: branch.to_string(),
        commit,
        pr_title: title.to_string(),
        pr_body_path: body_path,
    }))
}
