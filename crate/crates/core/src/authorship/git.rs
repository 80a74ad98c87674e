//! History provider that shells out to `git log -L` per line range. Queries
//! are independent per member; per-repository full-history listings are
//! cached behind a mutex so parallel workers share them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;

use crate::error::{Error, Result};

use super::{AuthorIdentity, CommitInfo, HistoryProvider};

const FIELD_SEP: char = '\u{1f}';
const RECORD_SEP: char = '\u{1e}';

pub struct GitHistoryProvider {
    repos: BTreeMap<String, PathBuf>,
    first_parent: bool,
    full_history: Mutex<BTreeMap<String, Vec<CommitInfo>>>,
}

impl GitHistoryProvider {
    /// `repos` maps repo_id to a full (non-shallow) checkout.
    pub fn new(repos: BTreeMap<String, PathBuf>, first_parent: bool) -> Self {
        GitHistoryProvider {
            repos,
            first_parent,
            full_history: Mutex::new(BTreeMap::new()),
        }
    }

    fn repo_path(&self, repo_id: &str) -> Result<&Path> {
        self.repos
            .get(repo_id)
            .map(PathBuf::as_path)
            .ok_or_else(|| Error::History(format!("no checkout registered for {repo_id}")))
    }

    fn ensure_full_clone(&self, repo_id: &str, path: &Path) -> Result<()> {
        if path.join(".git").join("shallow").exists() {
            return Err(Error::History(format!(
                "{repo_id} is a shallow clone; line-range history needs the full history (re-clone without --depth)"
            )));
        }
        Ok(())
    }

    fn run_git(&self, repo_id: &str, args: &[String]) -> Result<String> {
        let path = self.repo_path(repo_id)?;
        self.ensure_full_clone(repo_id, path)?;
        let output = Command::new("git")
            .args(args)
            .current_dir(path)
            .output()
            .map_err(|e| Error::History(format!("spawning git for {repo_id}: {e}")))?;
        if !output.status.success() {
            return Err(Error::History(format!(
                "git {} failed in {repo_id}: {}",
                args.first().map(String::as_str).unwrap_or(""),
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        Ok(String::from_utf8_lossy(&output.stdout).into_owned())
    }

    fn parse_log(text: &str) -> Vec<CommitInfo> {
        let mut commits = Vec::new();
        for record in text.split(RECORD_SEP) {
            let record = record.trim_start_matches(['\n', '\r']);
            if record.trim().is_empty() {
                continue;
            }
            let mut fields = record.splitn(5, FIELD_SEP);
            let (Some(sha), Some(name), Some(email), Some(ts)) = (
                fields.next(),
                fields.next(),
                fields.next(),
                fields.next(),
            ) else {
                continue;
            };
            let message = fields.next().unwrap_or("").trim().to_string();
            let Ok(authored_timestamp) = ts.trim().parse::<i64>() else {
                continue;
            };
            commits.push(CommitInfo {
                sha: sha.trim().to_lowercase(),
                author: AuthorIdentity {
                    name: name.to_string(),
                    email: email.to_string(),
                },
                authored_timestamp,
                message,
            });
        }
        commits
    }

    fn full_history_of(&self, repo_id: &str) -> Result<Vec<CommitInfo>> {
        {
            let cache = self.full_history.lock().expect("history cache poisoned");
            if let Some(hit) = cache.get(repo_id) {
                return Ok(hit.clone());
            }
        }
        let args = vec![
            "log".to_string(),
            "HEAD".to_string(),
            format!("--pretty=format:%H{FIELD_SEP}%an{FIELD_SEP}%ae{FIELD_SEP}%at{FIELD_SEP}%B{RECORD_SEP}"),
            "--no-patch".to_string(),
        ];
        let commits = Self::parse_log(&self.run_git(repo_id, &args)?);
        let mut cache = self.full_history.lock().expect("history cache poisoned");
        cache.insert(repo_id.to_string(), commits.clone());
        Ok(commits)
    }
}

impl HistoryProvider for GitHistoryProvider {
    fn line_history(
        &self,
        repo_id: &str,
        path: &str,
        start_line: usize,
        end_line: usize,
    ) -> Result<Vec<CommitInfo>> {
        let args = vec![
            "log".to_string(),
            format!("--pretty=format:%H{FIELD_SEP}%an{FIELD_SEP}%ae{FIELD_SEP}%at{FIELD_SEP}%B{RECORD_SEP}"),
            "--no-patch".to_string(),
            format!("-L{start_line},{end_line}:{path}"),
        ];
        let commits = Self::parse_log(&self.run_git(repo_id, &args).map_err(|e| {
            Error::History(format!(
                "line history for {repo_id} {path}:{start_line}-{end_line}: {e}"
            ))
        })?);
        if commits.is_empty() {
            return Err(Error::History(format!(
                "empty line history for {repo_id} {path}:{start_line}-{end_line}"
            )));
        }
        Ok(commits)
    }

    fn author_prior_commits(
        &self,
        repo_id: &str,
        author: &AuthorIdentity,
        before_timestamp: i64,
    ) -> Result<u64> {
        let commits = self.full_history_of(repo_id)?;
        Ok(commits
            .iter()
            .filter(|c| c.author == *author && c.authored_timestamp < before_timestamp)
            .count() as u64)
    }

    fn commits_to_head(&self, repo_id: &str, sha: &str) -> Result<u64> {
        let mut args = vec!["rev-list".to_string(), "--count".to_string()];
        if self.first_parent {
            args.push("--first-parent".to_string());
        }
        args.push(format!("{sha}..HEAD"));
        let out = self.run_git(repo_id, &args)?;
        out.trim()
            .parse::<u64>()
            .map_err(|e| Error::History(format!("unparseable rev-list count {out:?}: {e}")))
    }
}
