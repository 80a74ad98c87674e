//! Statement-context similarity around clone-group members.
//!
//! For each member, up to `window` non-blank, non-comment physical lines
//! above and below the comment form a statement block. Blocks are turned
//! into bag-of-words count vectors (punctuation removed, case kept, no
//! stemming), tokens present in more than half of a group's blocks are
//! dropped, and the within-group pairwise cosine scores get summarized by
//! mean and median.

use serde::{Deserialize, Serialize};

use crate::cluster::CommentVector;
use crate::error::{Error, Result};
use crate::types::SourceComment;

/// Default number of context lines taken on each side.
pub const DEFAULT_WINDOW: usize = 5;

/// The statements surrounding one comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementBlock {
    pub comment_id: String,
    pub upper_lines: Vec<String>,
    pub lower_lines: Vec<String>,
    pub joined_text: String,
}

impl StatementBlock {
    pub fn is_empty(&self) -> bool {
        self.upper_lines.is_empty() && self.lower_lines.is_empty()
    }
}

/// Within-group pairwise similarity summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSimilarity {
    pub group_id: String,
    pub pair_scores: Vec<f64>,
    pub mean: f64,
    pub median: f64,
}

/// Extract the statement block around a comment. `comment_spans` holds the
/// (start_line, end_line) spans of every extracted comment in the file so
/// that neighboring comments are skipped rather than counted as statements.
pub fn extract_context(
    file_lines: &[&str],
    comment: &SourceComment,
    window: usize,
    comment_spans: &[(usize, usize)],
) -> StatementBlock {
    let in_comment =
        |lineno: usize| comment_spans.iter().any(|&(s, e)| lineno >= s && lineno <= e);
    let usable = |lineno: usize| {
        lineno >= 1
            && lineno <= file_lines.len()
            && !file_lines[lineno - 1].trim().is_empty()
            && !in_comment(lineno)
    };

    let mut upper = Vec::new();
    let mut lineno = comment.start_line;
    while lineno > 1 && upper.len() < window {
        lineno -= 1;
        if usable(lineno) {
            upper.push(file_lines[lineno - 1].to_string());
        }
    }
    upper.reverse();

    let mut lower = Vec::new();
    let mut lineno = comment.end_line;
    while lineno < file_lines.len() && lower.len() < window {
        lineno += 1;
        if usable(lineno) {
            lower.push(file_lines[lineno - 1].to_string());
        }
    }

    let joined_text = upper
        .iter()
        .chain(lower.iter())
        .cloned()
        .collect::<Vec<_>>()
        .join("\n");
    StatementBlock {
        comment_id: comment.comment_id(),
        upper_lines: upper,
        lower_lines: lower,
        joined_text,
    }
}

/// Punctuation to strip before tokenizing: ASCII punctuation (which covers
/// the `# < > / = " '` family) plus the general Unicode punctuation blocks.
fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || ('\u{2000}'..='\u{206F}').contains(&c)
        || ('\u{2E00}'..='\u{2E7F}').contains(&c)
        || ('\u{3000}'..='\u{303F}').contains(&c)
}

fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| if is_punctuation(c) { ' ' } else { c })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Bag-of-words count vectors over a shared vocabulary. Case-sensitive,
/// whitespace-tokenized after punctuation removal. `max_df` (when given)
/// removes tokens whose document frequency strictly exceeds that fraction
/// of documents. Nonzero vectors are L2-normalized.
pub fn bow_vectors(ids: &[String], texts: &[&str], max_df: Option<f64>) -> Vec<CommentVector> {
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    let mut df: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for doc in &docs {
        let unique: std::collections::BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let n_docs = docs.len() as f64;
    let vocab: std::collections::BTreeMap<&str, usize> = df
        .iter()
        .filter(|(_, &count)| match max_df {
            Some(limit) => count as f64 / n_docs <= limit,
            None => true,
        })
        .map(|(&t, _)| t)
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();

    ids.iter()
        .zip(docs.iter())
        .map(|(id, doc)| {
            let mut values = vec![0.0; vocab.len()];
            for token in doc {
                if let Some(&idx) = vocab.get(token.as_str()) {
                    values[idx] += 1.0;
                }
            }
            CommentVector::from_raw(id.clone(), values)
        })
        .collect()
}

/// Vectorize the statement blocks of one clone group: count vectors with
/// the >50% document-frequency filter applied within the group.
pub fn vectorize_statements(blocks: &[StatementBlock]) -> Vec<CommentVector> {
    let ids: Vec<String> = blocks.iter().map(|b| b.comment_id.clone()).collect();
    let texts: Vec<&str> = blocks.iter().map(|b| b.joined_text.as_str()).collect();
    bow_vectors(&ids, &texts, Some(0.5))
}

/// Median with midpoint averaging for even counts. Input need not be
/// sorted.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Pairwise cosine over the usable (nonzero) block vectors of a group.
/// Fewer than two usable vectors is an error the caller converts into a
/// skip record.
pub fn group_similarity(group_id: &str, vectors: &[CommentVector]) -> Result<GroupSimilarity> {
    let usable: Vec<&CommentVector> = vectors.iter().filter(|v| v.norm > 0.0).collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "group {group_id} has {} usable statement block(s)",
            usable.len()
        )));
    }
    let mut pair_scores = Vec::with_capacity(usable.len() * (usable.len() - 1) / 2);
    for i in 0..usable.len() {
        for j in (i + 1)..usable.len() {
            pair_scores.push(usable[i].cosine(usable[j]).clamp(0.0, 1.0));
        }
    }
    let mean = pair_scores.iter().sum::<f64>() / pair_scores.len() as f64;
    let med = median(&pair_scores);
    Ok(GroupSimilarity {
        group_id: group_id.to_string(),
        pair_scores,
        mean,
        median: med,
    })
}
