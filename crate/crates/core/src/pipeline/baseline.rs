//! Non-SATD baseline selection: for every SATD comment, the nearest
//! non-SATD comment above and below it in the same build file. The
//! resulting set is the comparison population for the prevalence, context,
//! and authorship analyses.

use std::collections::{BTreeMap, BTreeSet};

use crate::types::SourceComment;

/// Pick up to two adjacent non-SATD comments per SATD comment. The returned
/// set is deduplicated and ordered by (repo, path, start line).
pub fn select_adjacent_non_satd(
    all_comments: &[SourceComment],
    satd_ids: &BTreeSet<String>,
) -> Vec<SourceComment> {
    let mut by_file: BTreeMap<(String, String), Vec<&SourceComment>> = BTreeMap::new();
    for c in all_comments {
        by_file
            .entry((c.repo_id.clone(), c.relative_path.clone()))
            .or_default()
            .push(c);
    }

    let mut selected: BTreeMap<String, SourceComment> = BTreeMap::new();
    for comments in by_file.values_mut() {
        comments.sort_by_key(|c| c.start_line);
        let satd_in_file: Vec<&SourceComment> = comments
            .iter()
            .copied()
            .filter(|c| satd_ids.contains(&c.comment_id()))
            .collect();
        for satd in satd_in_file {
            let above = comments
                .iter()
                .filter(|c| {
                    !satd_ids.contains(&c.comment_id()) && c.end_line < satd.start_line
                })
                .max_by_key(|c| c.end_line);
            let below = comments
                .iter()
                .filter(|c| {
                    !satd_ids.contains(&c.comment_id()) && c.start_line > satd.end_line
                })
                .min_by_key(|c| c.start_line);
            for pick in [above, below].into_iter().flatten() {
                selected.insert(pick.comment_id(), (*pick).clone());
            }
        }
    }

    let mut out: Vec<SourceComment> = selected.into_values().collect();
    out.sort_by(|a, b| {
        (&a.repo_id, &a.relative_path, a.start_line).cmp(&(
            &b.repo_id,
            &b.relative_path,
            b.start_line,
        ))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BuildTool, CommentSyntax};

    fn comment(path: &str, line: usize, text: &str) -> SourceComment {
        SourceComment {
            repo_id: "o/r".into(),
            relative_path: path.into(),
            build_tool: BuildTool::Cmake,
            start_line: line,
            end_line: line,
            raw_text: text.into(),
            syntax: CommentSyntax::Hash,
        }
    }

    #[test]
    fn picks_nearest_above_and_below() {
        let comments = vec![
            comment("a.cmake", 1, "far above"),
            comment("a.cmake", 3, "near above"),
            comment("a.cmake", 5, "TODO satd"),
            comment("a.cmake", 8, "near below"),
            comment("a.cmake", 9, "far below"),
        ];
        let satd_ids = BTreeSet::from([comments[2].comment_id()]);
        let picked = select_adjacent_non_satd(&comments, &satd_ids);
        let lines: Vec<usize> = picked.iter().map(|c| c.start_line).collect();
        assert_eq!(lines, vec![3, 8]);
    }

    #[test]
    fn shared_neighbor_selected_once() {
        let comments = vec![
            comment("a.cmake", 1, "TODO first"),
            comment("a.cmake", 3, "shared neighbor"),
            comment("a.cmake", 5, "TODO second"),
        ];
        let satd_ids = BTreeSet::from([comments[0].comment_id(), comments[2].comment_id()]);
        let picked = select_adjacent_non_satd(&comments, &satd_ids);
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].start_line, 3);
    }

    #[test]
    fn other_files_do_not_contribute() {
        let comments = vec![
            comment("a.cmake", 5, "TODO satd"),
            comment("b.cmake", 4, "different file"),
        ];
        let satd_ids = BTreeSet::from([comments[0].comment_id()]);
        assert!(select_adjacent_non_satd(&comments, &satd_ids).is_empty());
    }
}
