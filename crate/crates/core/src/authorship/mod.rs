//! Authorship of clone-group members: which commit introduced each comment,
//! who wrote it, and how authorship concentrates within a group.

pub mod git;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::{bow_vectors, median};
use crate::error::{Error, Result};
use crate::types::SourceComment;

/// Author equality is exact (name, email) pair equality; no alias merging.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuthorIdentity {
    pub name: String,
    pub email: String,
}

/// One commit as reported by a history provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitInfo {
    pub sha: String,
    pub author: AuthorIdentity,
    pub authored_timestamp: i64,
    pub message: String,
}

/// The commit that introduced a comment, plus derived counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntroductionRecord {
    pub comment_id: String,
    pub repo_id: String,
    pub commit_sha: String,
    pub author_name: String,
    pub author_email: String,
    pub authored_timestamp: i64,
    pub commit_message: String,
    /// Commits by the same identity strictly before the introduction.
    pub author_prior_commit_count: u64,
    /// First-parent commits from the introduction (exclusive) to HEAD.
    pub commits_to_head: u64,
}

impl IntroductionRecord {
    pub fn author(&self) -> AuthorIdentity {
        AuthorIdentity {
            name: self.author_name.clone(),
            email: self.author_email.clone(),
        }
    }
}

/// Answers line-range history questions for a repository checkout.
///
/// `line_history` returns every commit that touched the range, newest
/// first, the order `git log -L` emits. The inherited limitation applies:
/// the underlying `--follow` rename tracking works per file, not per line
/// range, so a comment that moved across files reports the history of its
/// current file only.
pub trait HistoryProvider: Sync {
    fn line_history(
        &self,
        repo_id: &str,
        path: &str,
        start_line: usize,
        end_line: usize,
    ) -> Result<Vec<CommitInfo>>;

    /// Commits in HEAD's history authored by `author` with an authored
    /// timestamp strictly before `before_timestamp`.
    fn author_prior_commits(
        &self,
        repo_id: &str,
        author: &AuthorIdentity,
        before_timestamp: i64,
    ) -> Result<u64>;

    /// First-parent commit count from `sha` (exclusive) to HEAD.
    fn commits_to_head(&self, repo_id: &str, sha: &str) -> Result<u64>;
}

/// Resolve the commit that introduced a comment: the oldest commit in the
/// line-range history of its span.
pub fn resolve_introduction(
    member: &SourceComment,
    history: &dyn HistoryProvider,
) -> Result<IntroductionRecord> {
    let commits = history.line_history(
        &member.repo_id,
        &member.relative_path,
        member.start_line,
        member.end_line,
    )?;
    let oldest = commits.last().ok_or_else(|| {
        Error::History(format!(
            "no history for {} {}:{}-{}",
            member.repo_id, member.relative_path, member.start_line, member.end_line
        ))
    })?;
    let prior = history.author_prior_commits(
        &member.repo_id,
        &oldest.author,
        oldest.authored_timestamp,
    )?;
    let to_head = history.commits_to_head(&member.repo_id, &oldest.sha)?;
    Ok(IntroductionRecord {
        comment_id: member.comment_id(),
        repo_id: member.repo_id.clone(),
        commit_sha: oldest.sha.to_lowercase(),
        author_name: oldest.author.name.clone(),
        author_email: oldest.author.email.clone(),
        authored_timestamp: oldest.authored_timestamp,
        commit_message: oldest.message.clone(),
        author_prior_commit_count: prior,
        commits_to_head: to_head,
    })
}

/// Cache-aware variant keyed by (repo, path, span); reruns resolve from the
/// cache without touching the repository.
pub fn resolve_introduction_cached(
    member: &SourceComment,
    history: &dyn HistoryProvider,
    cache: &mut BTreeMap<String, IntroductionRecord>,
) -> Result<IntroductionRecord> {
    let key = format!(
        "{}|{}|{}|{}",
        member.repo_id, member.relative_path, member.start_line, member.end_line
    );
    if let Some(hit) = cache.get(&key) {
        let mut record = hit.clone();
        record.comment_id = member.comment_id();
        return Ok(record);
    }
    let record = resolve_introduction(member, history)?;
    cache.insert(key, record.clone());
    Ok(record)
}

/// Within one clone group, keep a single record per (repo, commit sha); the
/// survivor is the one with the smallest comment id.
pub fn dedupe_group(mut records: Vec<IntroductionRecord>) -> Vec<IntroductionRecord> {
    records.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
    let mut seen = std::collections::BTreeSet::new();
    records.retain(|r| seen.insert((r.repo_id.clone(), r.commit_sha.clone())));
    records
}

/// Group-level authorship metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAuthorshipMetrics {
    pub group_id: String,
    pub group_size_after_dedupe: usize,
    /// Unique authors / group size.
    pub uad: f64,
    /// Largest per-author share of the group.
    pub mcd: f64,
    pub single_author: bool,
    pub median_commits_to_head: f64,
    pub median_author_experience: f64,
}

pub fn group_metrics(
    group_id: &str,
    records: &[IntroductionRecord],
) -> Result<GroupAuthorshipMetrics> {
    if records.is_empty() {
        return Err(Error::InsufficientData(format!(
            "group {group_id} has no introduction records"
        )));
    }
    let n = records.len();
    let mut per_author: BTreeMap<AuthorIdentity, usize> = BTreeMap::new();
    for r in records {
        *per_author.entry(r.author()).or_insert(0) += 1;
    }
    let unique = per_author.len();
    let max_per_author = per_author.values().copied().max().unwrap_or(0);
    let to_head: Vec<f64> = records.iter().map(|r| r.commits_to_head as f64).collect();
    let experience: Vec<f64> = records
        .iter()
        .map(|r| r.author_prior_commit_count as f64)
        .collect();
    Ok(GroupAuthorshipMetrics {
        group_id: group_id.to_string(),
        group_size_after_dedupe: n,
        uad: unique as f64 / n as f64,
        mcd: max_per_author as f64 / n as f64,
        single_author: unique == 1,
        median_commits_to_head: median(&to_head),
        median_author_experience: median(&experience),
    })
}

/// Pairwise cosine over bag-of-words vectors of the commit messages (same
/// normalization as statement vectors, without the document-frequency
/// filter); returns (mean, median).
pub fn message_similarity(records: &[IntroductionRecord]) -> Result<(f64, f64)> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(
            "message similarity needs at least 2 records".into(),
        ));
    }
    let ids: Vec<String> = records.iter().map(|r| r.comment_id.clone()).collect();
    let texts: Vec<&str> = records.iter().map(|r| r.commit_message.as_str()).collect();
    let vectors = bow_vectors(&ids, &texts, None);
    let mut scores = Vec::new();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            scores.push(vectors[i].cosine(&vectors[j]).clamp(0.0, 1.0));
        }
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((mean, median(&scores)))
}

/// Scripted history for tests and hermetic reruns.
#[derive(Debug, Default, Clone)]
pub struct InMemoryHistory {
    /// (repo, path, start, end) -> commits newest first.
    pub line_histories: BTreeMap<(String, String, usize, usize), Vec<CommitInfo>>,
    /// repo -> full HEAD history, any order.
    pub commits: BTreeMap<String, Vec<CommitInfo>>,
    /// (repo, sha) -> first-parent distance to HEAD.
    pub head_distances: BTreeMap<(String, String), u64>,
}

impl HistoryProvider for InMemoryHistory {
    fn line_history(
        &self,
        repo_id: &str,
        path: &str,
        start_line: usize,
        end_line: usize,
    ) -> Result<Vec<CommitInfo>> {
        self.line_histories
            .get(&(
                repo_id.to_string(),
                path.to_string(),
                start_line,
                end_line,
            ))
            .cloned()
            .ok_or_else(|| {
                Error::History(format!(
                    "unknown range {repo_id} {path}:{start_line}-{end_line}"
                ))
            })
    }

    fn author_prior_commits(
        &self,
        repo_id: &str,
        author: &AuthorIdentity,
        before_timestamp: i64,
    ) -> Result<u64> {
        let commits = self
            .commits
            .get(repo_id)
            .ok_or_else(|| Error::History(format!("unknown repo {repo_id}")))?;
        Ok(commits
            .iter()
            .filter(|c| c.author == *author && c.authored_timestamp < before_timestamp)
            .count() as u64)
    }

    fn commits_to_head(&self, repo_id: &str, sha: &str) -> Result<u64> {
        self.head_distances
            .get(&(repo_id.to_string(), sha.to_string()))
            .copied()
            .ok_or_else(|| Error::History(format!("unknown sha {sha} in {repo_id}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BuildTool, CommentSyntax};

    fn author(name: &str) -> AuthorIdentity {
        AuthorIdentity {
            name: name.into(),
            email: format!("{}@example.org", name.to_lowercase()),
        }
    }

    fn commit(sha: &str, who: &str, ts: i64, msg: &str) -> CommitInfo {
        CommitInfo {
            sha: sha.into(),
            author: author(who),
            authored_timestamp: ts,
            message: msg.into(),
        }
    }

    fn record(comment_id: &str, repo: &str, sha: &str, who: &str) -> IntroductionRecord {
        IntroductionRecord {
            comment_id: comment_id.into(),
            repo_id: repo.into(),
            commit_sha: sha.into(),
            author_name: who.into(),
            author_email: format!("{}@example.org", who.to_lowercase()),
            authored_timestamp: 0,
            commit_message: String::new(),
            author_prior_commit_count: 0,
            commits_to_head: 0,
        }
    }

    fn member(repo: &str, path: &str, line: usize) -> SourceComment {
        SourceComment {
            repo_id: repo.into(),
            relative_path: path.into(),
            build_tool: BuildTool::Cmake,
            start_line: line,
            end_line: line,
            raw_text: "TODO x".into(),
            syntax: CommentSyntax::Hash,
        }
    }

    /// Five linear commits; the comment is introduced in commit 2, so the
    /// introducing sha is c2 and three commits follow it to HEAD.
    fn five_commit_history() -> InMemoryHistory {
        let mut h = InMemoryHistory::default();
        let all: Vec<CommitInfo> = vec![
            commit("c1", "Dana", 100, "init"),
            commit("c2", "Erin", 200, "add todo"),
            commit("c3", "Dana", 300, "tweak"),
            commit("c4", "Erin", 400, "more"),
            commit("c5", "Frank", 500, "head"),
        ];
        h.commits.insert("o/r".into(), all);
        h.line_histories.insert(
            ("o/r".into(), "f.cmake".into(), 2, 2),
            vec![commit("c2", "Erin", 200, "add todo")],
        );
        for (sha, dist) in [("c1", 4), ("c2", 3), ("c3", 2), ("c4", 1), ("c5", 0)] {
            h.head_distances.insert(("o/r".into(), sha.into()), dist);
        }
        h
    }

    #[test]
    fn introduction_from_second_of_five_commits() {
        let h = five_commit_history();
        let r = resolve_introduction(&member("o/r", "f.cmake", 2), &h).unwrap();
        assert_eq!(r.commit_sha, "c2");
        assert_eq!(r.commits_to_head, 3);
        assert_eq!(r.author_prior_commit_count, 0, "Erin's first commit");
        assert_eq!(r.author_name, "Erin");
    }

    #[test]
    fn moved_comment_resolves_to_oldest_in_range_history() {
        let mut h = five_commit_history();
        // A later refactor moved the comment; the range history lists the
        // move commit first (newest) and the true introduction last.
        h.line_histories.insert(
            ("o/r".into(), "f.cmake".into(), 7, 7),
            vec![
                commit("c4", "Erin", 400, "move things around"),
                commit("c2", "Erin", 200, "add todo"),
            ],
        );
        let r = resolve_introduction(&member("o/r", "f.cmake", 7), &h).unwrap();
        assert_eq!(r.commit_sha, "c2");
    }

    #[test]
    fn prior_commits_count_only_strictly_earlier_same_identity() {
        let mut h = five_commit_history();
        h.line_histories.insert(
            ("o/r".into(), "f.cmake".into(), 9, 9),
            vec![commit("c4", "Erin", 400, "more")],
        );
        let r = resolve_introduction(&member("o/r", "f.cmake", 9), &h).unwrap();
        assert_eq!(r.author_prior_commit_count, 1, "only c2 precedes c4 for Erin");
    }

    #[test]
    fn unknown_range_is_a_history_error() {
        let h = five_commit_history();
        let err = resolve_introduction(&member("o/r", "nope.cmake", 1), &h).unwrap_err();
        assert!(matches!(err, Error::History(_)));
    }

    #[test]
    fn cache_rebinds_comment_id() {
        let h = five_commit_history();
        let mut cache = BTreeMap::new();
        let a = resolve_introduction_cached(&member("o/r", "f.cmake", 2), &h, &mut cache).unwrap();
        assert_eq!(cache.len(), 1);
        // Second resolve hits the cache even with an empty provider.
        let empty = InMemoryHistory::default();
        let b =
            resolve_introduction_cached(&member("o/r", "f.cmake", 2), &empty, &mut cache).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dedupe_keeps_smallest_comment_id_per_repo_sha() {
        let records = vec![
            record("z-late", "o/a", "s1", "A"),
            record("a-early", "o/a", "s1", "A"),
            record("m-mid", "o/b", "s1", "B"),
        ];
        let out = dedupe_group(records);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].comment_id, "a-early");
        assert_eq!(out[1].comment_id, "m-mid");
        assert!(dedupe_group(Vec::new()).is_empty());
    }

    #[test]
    fn metrics_for_mixed_authors() {
        let records = vec![
            record("c1", "o/a", "s1", "A"),
            record("c2", "o/b", "s2", "A"),
            record("c3", "o/c", "s3", "B"),
            record("c4", "o/d", "s4", "C"),
        ];
        let m = group_metrics("g", &records).unwrap();
        assert_eq!(m.uad, 0.75);
        assert_eq!(m.mcd, 0.5);
        assert!(!m.single_author);
    }

    #[test]
    fn metrics_single_author_five_clones() {
        let records: Vec<IntroductionRecord> = (0..5)
            .map(|i| record(&format!("c{i}"), &format!("o/r{i}"), &format!("s{i}"), "A"))
            .collect();
        let m = group_metrics("g", &records).unwrap();
        assert_eq!(m.uad, 0.2);
        assert_eq!(m.mcd, 1.0);
        assert!(m.single_author);
    }

    #[test]
    fn metrics_degenerate_single_record() {
        let m = group_metrics("g", &[record("c", "o/a", "s", "A")]).unwrap();
        assert_eq!(m.uad, 1.0);
        assert_eq!(m.mcd, 1.0);
        assert!(m.single_author);
    }

    #[test]
    fn duplicated_records_leave_metrics_unchanged_after_dedupe() {
        let base = vec![
            record("c1", "o/a", "s1", "A"),
            record("c2", "o/b", "s2", "B"),
        ];
        let mut doubled = base.clone();
        doubled.extend(vec![
            record("c1x", "o/a", "s1", "A"),
            record("c2x", "o/b", "s2", "B"),
        ]);
        let m1 = group_metrics("g", &dedupe_group(base)).unwrap();
        let m2 = group_metrics("g", &dedupe_group(doubled)).unwrap();
        assert_eq!(m1.uad, m2.uad);
        assert_eq!(m1.mcd, m2.mcd);
    }

    #[test]
    fn message_similarity_examples() {
        let mut a = record("c1", "o/a", "s1", "A");
        let mut b = record("c2", "o/b", "s2", "B");
        a.commit_message = "Fix the build on AIX".into();
        b.commit_message = "Fix the build on AIX".into();
        let (mean, med) = message_similarity(&[a.clone(), b.clone()]).unwrap();
        assert!((mean - 1.0).abs() < 1e-12);
        assert!((med - 1.0).abs() < 1e-12);

        b.commit_message = "unrelated words entirely".into();
        let (mean, med) = message_similarity(&[a.clone(), b]).unwrap();
        assert_eq!((mean, med), (0.0, 0.0));

        assert!(message_similarity(&[a]).is_err());
    }

    #[test]
    fn message_similarity_matches_brute_force() {
        let mut r1 = record("c1", "o/a", "s1", "A");
        let mut r2 = record("c2", "o/b", "s2", "B");
        let mut r3 = record("c3", "o/c", "s3", "C");
        r1.commit_message = "add workaround for linker".into();
        r2.commit_message = "add workaround for compiler".into();
        r3.commit_message = "remove dead code".into();
        let records = vec![r1, r2, r3];
        let (mean, med) = message_similarity(&records).unwrap();

        let ids: Vec<String> = records.iter().map(|r| r.comment_id.clone()).collect();
        let texts: Vec<&str> = records.iter().map(|r| r.commit_message.as_str()).collect();
        let vs = bow_vectors(&ids, &texts, None);
        let mut scores = Vec::new();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                let dot: f64 = vs[i].values.iter().zip(&vs[j].values).map(|(a, b)| a * b).sum();
                scores.push(dot);
            }
        }
        let oracle_mean = scores.iter().sum::<f64>() / scores.len() as f64;
        assert!((mean - oracle_mean).abs() < 1e-12);
        assert!((med - median(&scores)).abs() < 1e-12);
    }

    #[test]
    fn single_author_implies_extreme_densities() {
        let records: Vec<IntroductionRecord> = (0..4)
            .map(|i| record(&format!("c{i}"), &format!("o/r{i}"), &format!("s{i}"), "Z"))
            .collect();
        let m = group_metrics("g", &records).unwrap();
        assert!(m.single_author);
        assert_eq!(m.uad, 1.0 / m.group_size_after_dedupe as f64);
        assert_eq!(m.mcd, 1.0);
    }
}
