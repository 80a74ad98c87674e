//! Propagation timelines: the data behind a bubble plot of how a clone
//! group spread over repositories and years.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::authorship::IntroductionRecord;
use crate::cluster::CloneGroup;
use crate::types::BuildTool;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub group_id: String,
    pub authored_timestamp: i64,
    pub repo_id: String,
    pub stars: u64,
    pub build_tool: BuildTool,
}

/// Rows for one group, ordered by introduction time (ties by repo id); the
/// first row is the original introduction.
pub fn emit_timeline(
    group: &CloneGroup,
    records: &[IntroductionRecord],
    stars: &BTreeMap<String, u64>,
    tools: &BTreeMap<String, BuildTool>,
) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = records
        .iter()
        .map(|r| TimelineRow {
            group_id: group.group_id.clone(),
            authored_timestamp: r.authored_timestamp,
            repo_id: r.repo_id.clone(),
            stars: stars.get(&r.repo_id).copied().unwrap_or(0),
            build_tool: tools
                .get(&r.comment_id)
                .copied()
                .unwrap_or(BuildTool::Cmake),
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.authored_timestamp, &a.repo_id).cmp(&(b.authored_timestamp, &b.repo_id))
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(comment_id: &str, repo: &str, ts: i64) -> IntroductionRecord {
        IntroductionRecord {
            comment_id: comment_id.into(),
            repo_id: repo.into(),
            commit_sha: "0".repeat(40),
            author_name: "A".into(),
            author_email: "a@example.org".into(),
            authored_timestamp: ts,
            commit_message: String::new(),
            author_prior_commit_count: 0,
            commits_to_head: 0,
        }
    }

    fn group() -> CloneGroup {
        CloneGroup::unclassified("g0001", vec!["m1".into(), "m2".into()])
    }

    #[test]
    fn rows_sorted_by_time() {
        let stars = BTreeMap::from([("o/new".to_string(), 5u64), ("o/old".to_string(), 9u64)]);
        let tools = BTreeMap::from([
            ("m1".to_string(), BuildTool::Maven),
            ("m2".to_string(), BuildTool::Cmake),
        ]);
        // Introduced in 2002, cloned in 2010.
        let rows = emit_timeline(
            &group(),
            &[record("m2", "o/new", 1_270_000_000), record("m1", "o/old", 1_021_420_800)],
            &stars,
            &tools,
        );
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].repo_id, "o/old");
        assert_eq!(rows[0].stars, 9);
        assert_eq!(rows[0].build_tool, BuildTool::Maven);
        assert_eq!(rows[1].repo_id, "o/new");
    }

    #[test]
    fn single_member_group_has_one_row() {
        let rows = emit_timeline(
            &group(),
            &[record("m1", "o/only", 1)],
            &BTreeMap::new(),
            &BTreeMap::new(),
        );
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn timestamp_ties_break_by_repo_id() {
        let rows = emit_timeline(
            &group(),
            &[record("m1", "o/bbb", 7), record("m2", "o/aaa", 7)],
            &BTreeMap::new(),
            &BTreeMap::new(),
        );
        assert_eq!(rows[0].repo_id, "o/aaa");
        assert_eq!(rows[1].repo_id, "o/bbb");
    }
}
