//! Corpus loading: manifest parsing, build-file discovery by filename
//! convention, and the four project-selection criteria.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use regex::Regex;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::extract::{self, ExtractOptions};
use crate::types::{BuildTool, SourceComment, WarningRecord};

/// Repository metadata used by the selection criteria and the dimension
/// classifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    /// `owner/name` identifier, unique within a manifest.
    pub repo_id: String,
    pub primary_language: String,
    pub commit_count: u64,
    pub issue_count: u64,
    pub contributor_count: u64,
    /// UTC seconds of the latest commit.
    pub last_commit_timestamp: i64,
    pub is_fork: bool,
    pub stars: u64,
    /// Checkout location on disk. Input only; never echoed into artifacts.
    pub local_path: PathBuf,
}

/// One build-specification file found under a repository checkout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildFileRecord {
    pub repo_id: String,
    pub relative_path: String,
    pub build_tool: BuildTool,
    pub line_count: u64,
    pub comment_line_count: u64,
}

/// Thresholds for the C1-C4 selection criteria. All values are the
/// documented defaults and may be overridden by configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// C1: minimum number of commits.
    pub min_commits: u64,
    /// C2: minimum number of issues.
    pub min_issues: u64,
    /// C2: maximum age of the latest commit relative to the reference
    /// timestamp, in seconds.
    pub max_commit_age_secs: i64,
    /// C2: minimum number of contributors.
    pub min_contributors: u64,
    /// C3: minimum summed build-file lines.
    pub min_build_lines: u64,
    /// C4: minimum summed build-file comment lines.
    pub min_comment_lines: u64,
    /// Point in time the recency check is evaluated against.
    pub reference_timestamp: i64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0);
        FilterConfig {
            min_commits: 100,
            min_issues: 1,
            max_commit_age_secs: 365 * 86_400,
            min_contributors: 3,
            min_build_lines: 500,
            min_comment_lines: 60,
            reference_timestamp: now,
        }
    }
}

/// Per-project criterion outcome, emitted as the scan report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub repo_id: String,
    pub c1_commits: bool,
    pub c2_activity: bool,
    pub c3_build_lines: bool,
    pub c4_comment_lines: bool,
    /// True when the repo had no entry in the build-file map.
    pub missing_build_files: bool,
    pub retained: bool,
}

/// Result of applying the selection criteria to a manifest.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub retained: Vec<ProjectRecord>,
    pub report: Vec<CriterionReport>,
}

/// Filename conventions mapping basenames to build tools.
///
/// The full convention list of the literature is not reprinted anywhere, so
/// this set is the configurable default; each entry is an anchored regular
/// expression matched against the basename only, case-sensitively, at any
/// directory depth.
#[derive(Debug, Clone)]
pub struct FilenameConventions {
    rules: Vec<(BuildTool, Vec<Regex>)>,
}

impl Default for FilenameConventions {
    fn default() -> Self {
        FilenameConventions::from_patterns(&[
            (BuildTool::Maven, vec![r"pom\.xml", r"maven([123])?\.xml"]),
            (BuildTool::Ant, vec![r"build\.xml"]),
            (BuildTool::Ivy, vec![r"ivy\.xml"]),
            (BuildTool::Cmake, vec![r"CMakeLists\.txt", r".*\.cmake"]),
            (
                BuildTool::Autotools,
                vec![
                    r"configure\.ac",
                    r"configure\.in",
                    r"Makefile\.am",
                    r".*\.m4",
                ],
            ),
        ])
        .expect("default conventions are valid regexes")
    }
}

impl FilenameConventions {
    /// Build a convention set from per-tool basename regexes. Patterns are
    /// anchored automatically.
    pub fn from_patterns(patterns: &[(BuildTool, Vec<&str>)]) -> Result<Self> {
        let mut rules = Vec::new();
        for (tool, pats) in patterns {
            let mut regexes = Vec::new();
            for p in pats {
                let anchored = format!("^(?:{p})$");
                let re = Regex::new(&anchored)
                    .map_err(|e| Error::Config(format!("bad convention pattern {p:?}: {e}")))?;
                regexes.push(re);
            }
            rules.push((*tool, regexes));
        }
        Ok(FilenameConventions { rules })
    }

    /// Convention set from configuration: tool name -> list of regexes.
    pub fn from_config(map: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut patterns = Vec::new();
        for (tool_name, pats) in map {
            let tool = match tool_name.to_ascii_uppercase().as_str() {
                "AUTOTOOLS" => BuildTool::Autotools,
                "CMAKE" => BuildTool::Cmake,
                "MAVEN" => BuildTool::Maven,
                "ANT" => BuildTool::Ant,
                "IVY" => BuildTool::Ivy,
                other => {
                    return Err(Error::Config(format!("unknown build tool {other:?}")));
                }
            };
            patterns.push((tool, pats.iter().map(String::as_str).collect::<Vec<_>>()));
        }
        FilenameConventions::from_patterns(&patterns)
    }

    /// First matching tool for a basename, in declaration order.
    pub fn classify(&self, basename: &str) -> Option<BuildTool> {
        for (tool, regexes) in &self.rules {
            if regexes.iter().any(|re| re.is_match(basename)) {
                return Some(*tool);
            }
        }
        None
    }
}

/// Walk a repository checkout and record every file whose basename matches a
/// convention, with line and comment-line counts. Output is sorted by
/// relative path; symlink cycles are skipped with a warning record.
pub fn identify_build_files(
    root: &Path,
    repo_id: &str,
    conventions: &FilenameConventions,
) -> Result<(Vec<BuildFileRecord>, Vec<WarningRecord>)> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus root is not a directory"),
        ));
    }
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for entry in WalkDir::new(root).follow_links(true).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                if err.loop_ancestor().is_some() {
                    warnings.push(WarningRecord::new(
                        "scan",
                        format!("{repo_id}:{}", display_of(err.path())),
                        "symlink cycle skipped",
                    ));
                    continue;
                }
                let path = err
                    .path()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| root.to_path_buf());
                return Err(Error::io(
                    path,
                    err.into_io_error().unwrap_or_else(|| {
                        std::io::Error::other("walk error")
                    }),
                ));
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let basename = entry.file_name().to_string_lossy();
        let Some(tool) = conventions.classify(&basename) else {
            continue;
        };
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_string_lossy()
            .replace('\\', "/");
        let bytes = fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        let contents = String::from_utf8_lossy(&bytes);
        let line_count = contents.lines().count() as u64;
        let comment_line_count = match extract_comment_lines(repo_id, &rel, tool, &contents) {
            Ok(n) => n,
            Err(err) => {
                warnings.push(WarningRecord::new(
                    "scan",
                    format!("{repo_id}:{rel}"),
                    format!("comment counting failed: {err}"),
                ));
                0
            }
        };
        files.push(BuildFileRecord {
            repo_id: repo_id.to_string(),
            relative_path: rel,
            build_tool: tool,
            line_count,
            comment_line_count,
        });
    }
    files.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));
    Ok((files, warnings))
}

fn display_of(path: Option<&Path>) -> String {
    path.map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_else(|| "<unknown>".into())
}

/// Number of distinct physical lines covered by comment spans.
fn extract_comment_lines(
    repo_id: &str,
    rel: &str,
    tool: BuildTool,
    contents: &str,
) -> Result<u64> {
    let comments = extract::extract_comments_raw(
        repo_id,
        rel,
        tool,
        contents,
        &ExtractOptions::default(),
    )?;
    Ok(count_comment_lines(&comments))
}

fn count_comment_lines(comments: &[SourceComment]) -> u64 {
    let mut lines: Vec<usize> = comments
        .iter()
        .flat_map(|c| c.start_line..=c.end_line)
        .collect();
    lines.sort_unstable();
    lines.dedup();
    lines.len() as u64
}

/// Parse a manifest file: a JSON array of [`ProjectRecord`], snake_case
/// fields. Repo ids must be unique and non-empty.
pub fn load_manifest(path: &Path) -> Result<Vec<ProjectRecord>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<ProjectRecord> = serde_json::from_slice(&bytes).map_err(|e| {
        Error::Artifact {
            path: path.to_path_buf(),
            message: format!("manifest parse error: {e}"),
        }
    })?;
    let mut seen = std::collections::BTreeSet::new();
    for r in &records {
        if r.repo_id.is_empty() {
            return Err(Error::InvalidInput("manifest contains empty repo_id".into()));
        }
        if r.last_commit_timestamp < 0 {
            return Err(Error::InvalidInput(format!(
                "negative last_commit_timestamp for {}",
                r.repo_id
            )));
        }
        if !seen.insert(r.repo_id.clone()) {
            return Err(Error::InvalidInput(format!(
                "duplicate repo_id in manifest: {}",
                r.repo_id
            )));
        }
    }
    Ok(records)
}

/// Apply C1-C4 and return the retained projects plus a per-criterion report.
///
/// A repo missing from `build_files` counts as zero build lines, failing C3,
/// and is flagged in the report.
pub fn filter_projects(
    manifest: &[ProjectRecord],
    build_files: &BTreeMap<String, Vec<BuildFileRecord>>,
    cfg: &FilterConfig,
) -> FilterOutcome {
    let mut retained = Vec::new();
    let mut report = Vec::new();
    for project in manifest {
        let files = build_files.get(&project.repo_id);
        let missing = files.is_none();
        let build_lines: u64 = files
            .map(|fs| fs.iter().map(|f| f.line_count).sum())
            .unwrap_or(0);
        let comment_lines: u64 = files
            .map(|fs| fs.iter().map(|f| f.comment_line_count).sum())
            .unwrap_or(0);

        let c1 = project.commit_count >= cfg.min_commits;
        let fresh = project.last_commit_timestamp + cfg.max_commit_age_secs
            >= cfg.reference_timestamp;
        let c2 = project.issue_count >= cfg.min_issues
            && fresh
            && !project.is_fork
            && project.contributor_count >= cfg.min_contributors;
        let c3 = build_lines >= cfg.min_build_lines;
        let c4 = comment_lines >= cfg.min_comment_lines;
        let keep = c1 && c2 && c3 && c4;
        if keep {
            retained.push(project.clone());
        }
        report.push(CriterionReport {
            repo_id: project.repo_id.clone(),
            c1_commits: c1,
            c2_activity: c2,
            c3_build_lines: c3,
            c4_comment_lines: c4,
            missing_build_files: missing,
            retained: keep,
        });
    }
    FilterOutcome { retained, report }
}

/// Survival curve used for threshold selection: for each distinct value `v`
/// in ascending order, the number of inputs >= v. Knee selection stays a
/// human decision; the chosen threshold flows back in through
/// [`FilterConfig`].
pub fn threshold_curve(values: &[u64]) -> Vec<(u64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut curve = Vec::new();
    let n = sorted.len();
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == v {
            j += 1;
        }
        curve.push((v, n - i));
        i = j;
    }
    curve
}
