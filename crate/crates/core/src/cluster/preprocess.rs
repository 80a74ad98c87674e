//! Text preprocessing ahead of vectorization: URL splitting, leading `dnl`
//! removal, special-character collapsing. Stop words are deliberately kept
//! because they can carry the meaning of a debt annotation; case is
//! preserved for storage and lowercased only inside the vectorizer.

use serde::{Deserialize, Serialize};

use crate::detect::SatdComment;
use crate::types::CommentSyntax;

/// A comment after normalization. `normalized_text` contains only
/// `[A-Za-z0-9 ]` with single spaces and no leading/trailing space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedComment {
    pub source: SatdComment,
    pub normalized_text: String,
    pub token_count: usize,
}

/// Normalize one SATD comment.
pub fn preprocess_text(comment: &SatdComment) -> PreprocessedComment {
    let strip_dnl = comment.comment.syntax == CommentSyntax::Dnl;
    let normalized = normalize_text(&comment.comment.raw_text, strip_dnl);
    let token_count = normalized.split_whitespace().count();
    PreprocessedComment {
        source: comment.clone(),
        normalized_text: normalized,
        token_count,
    }
}

/// The normalization pipeline, idempotent for a fixed `strip_leading_dnl`.
pub fn normalize_text(raw: &str, strip_leading_dnl: bool) -> String {
    let mut text = split_urls(raw);
    if strip_leading_dnl {
        text = strip_dnl_tokens(&text);
    }
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Replace separator characters inside `http://`/`https://` tokens with
/// spaces so that each hyperlink word carries weight of its own.
fn split_urls(text: &str) -> String {
    const SEPARATORS: [char; 9] = ['/', '.', ':', '-', '_', '?', '=', '&', '#'];
    let mut out = String::with_capacity(text.len());
    let mut first = true;
    for token in text.split(' ') {
        if !first {
            out.push(' ');
        }
        first = false;
        if token.starts_with("http://") || token.starts_with("https://") {
            for ch in token.chars() {
                out.push(if SEPARATORS.contains(&ch) { ' ' } else { ch });
            }
        } else {
            out.push_str(token);
        }
    }
    out
}

/// Remove every leading `dnl` token; the loop keeps the operation
/// idempotent for text like "dnl dnl note".
fn strip_dnl_tokens(text: &str) -> String {
    let mut rest = text.trim_start();
    while let Some(tail) = rest.strip_prefix("dnl") {
        match tail.chars().next() {
            None => rest = tail,
            Some(c) if !c.is_alphanumeric() && c != '_' => rest = tail.trim_start(),
            _ => break,
        }
    }
    rest.to_string()
}

/// CI1 tail: keep only comments with at least two tokens; single-word
/// annotations like a bare "TODO" are uninformative.
pub fn drop_single_word(comments: Vec<PreprocessedComment>) -> Vec<PreprocessedComment> {
    comments.into_iter().filter(|c| c.token_count >= 2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::SatdComment;
    use crate::types::{BuildTool, SourceComment};
    use std::collections::BTreeSet;

    fn satd(text: &str, syntax: CommentSyntax) -> SatdComment {
        SatdComment {
            comment: SourceComment {
                repo_id: "o/r".into(),
                relative_path: "configure.ac".into(),
                build_tool: BuildTool::Autotools,
                start_line: 1,
                end_line: 1,
                raw_text: text.into(),
                syntax,
            },
            matched_keywords: BTreeSet::from(["fixme".to_string()]),
        }
    }

    #[test]
    fn dnl_prefix_removed_and_specials_collapsed() {
        let p = preprocess_text(&satd("dnl FIXME: broken on AIX", CommentSyntax::Dnl));
        assert_eq!(p.normalized_text, "FIXME broken on AIX");
        assert_eq!(p.token_count, 4);
    }

    #[test]
    fn url_words_are_separated() {
        let p = preprocess_text(&satd(
            "see https://bugs.example.org/id=42",
            CommentSyntax::Hash,
        ));
        assert_eq!(p.normalized_text, "see https bugs example org id 42");
    }

    #[test]
    fn single_token_kept_verbatim() {
        let p = preprocess_text(&satd("TODO", CommentSyntax::Hash));
        assert_eq!(p.normalized_text, "TODO");
        assert_eq!(p.token_count, 1);
    }

    #[test]
    fn case_is_preserved() {
        let p = preprocess_text(&satd("Fix ME Later", CommentSyntax::Hash));
        assert_eq!(p.normalized_text, "Fix ME Later");
    }

    #[test]
    fn hash_comments_keep_leading_dnl_word() {
        let p = preprocess_text(&satd("dnl is an m4 macro", CommentSyntax::Hash));
        assert_eq!(p.normalized_text, "dnl is an m4 macro");
    }

    #[test]
    fn repeated_dnl_prefix_fully_stripped() {
        assert_eq!(normalize_text("dnl dnl note", true), "note");
        assert_eq!(normalize_text("dnlish note", true), "dnlish note");
    }

    #[test]
    fn drop_single_word_examples() {
        let keep = preprocess_text(&satd("TODO fix", CommentSyntax::Hash));
        let drop = preprocess_text(&satd("TODO", CommentSyntax::Hash));
        let out = drop_single_word(vec![keep.clone(), drop]);
        assert_eq!(out, vec![keep]);
        assert!(drop_single_word(Vec::new()).is_empty());
    }

    #[test]
    fn normalization_is_idempotent() {
        let samples = [
            "dnl FIXME: broken on AIX",
            "see https://bugs.example.org/id=42",
            "dnl dnl doubled",
            "  !!punct--only!!  ",
            "",
            "plain words",
        ];
        for s in samples {
            for strip in [true, false] {
                let once = normalize_text(s, strip);
                assert_eq!(normalize_text(&once, strip), once, "input {s:?}");
            }
        }
    }
}
