//! Comment vectorization backends.
//!
//! The backend contract: deterministic, equal lowercased text gives equal
//! vectors, fixed dimension within a batch, output L2-normalized. The
//! built-in backend is tf-idf over word unigrams and bigrams; externally
//! precomputed vectors (e.g. from a pretrained sentence encoder) can be
//! loaded from a JSONL file instead.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::preprocess::PreprocessedComment;

/// A comment embedded as a real vector. When `norm > 0`, `values` holds the
/// L2-normalized vector and `norm` records the pre-normalization length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentVector {
    pub comment_id: String,
    pub values: Vec<f64>,
    pub norm: f64,
}

impl CommentVector {
    /// Normalize raw values into a [`CommentVector`].
    pub fn from_raw(comment_id: String, mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        }
        CommentVector {
            comment_id,
            values,
            norm,
        }
    }

    /// Cosine similarity; inputs are already unit length, so this is the
    /// dot product.
    pub fn cosine(&self, other: &CommentVector) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn cosine_distance(&self, other: &CommentVector) -> f64 {
        1.0 - self.cosine(other)
    }
}

/// Which vectorizer produces the comment vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VectorizerBackend {
    /// Built-in tf-idf over unigrams and bigrams of the lowercased
    /// normalized text; idf = ln((1+N)/(1+df)) + 1.
    TfIdf,
    /// Precomputed vectors keyed by comment id, one JSON object per line:
    /// `{"comment_id": ..., "values": [...]}`.
    External(PathBuf),
}

impl VectorizerBackend {
    /// Parse the CLI form `tfidf` or `external:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "tfidf" {
            return Ok(VectorizerBackend::TfIdf);
        }
        if let Some(path) = spec.strip_prefix("external:") {
            if path.is_empty() {
                return Err(Error::Config("external vectorizer needs a path".into()));
            }
            return Ok(VectorizerBackend::External(PathBuf::from(path)));
        }
        Err(Error::Config(format!(
            "unknown vectorizer {spec:?}; expected tfidf or external:<path>"
        )))
    }
}

/// Vectorize a batch of preprocessed comments.
pub fn vectorize(
    comments: &[PreprocessedComment],
    backend: &VectorizerBackend,
) -> Result<Vec<CommentVector>> {
    if comments.is_empty() {
        return Err(Error::InvalidInput("no comments to vectorize".into()));
    }
    match backend {
        VectorizerBackend::TfIdf => Ok(tfidf(comments)),
        VectorizerBackend::External(path) => external(comments, path),
    }
}

/// Unigrams and bigrams of a lowercased document.
fn terms_of(text: &str) -> Vec<String> {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
    let mut terms = tokens.clone();
    for pair in tokens.windows(2) {
        terms.push(format!("{} {}", pair[0], pair[1]));
    }
    terms
}

fn tfidf(comments: &[PreprocessedComment]) -> Vec<CommentVector> {
    let docs: Vec<Vec<String>> = comments
        .iter()
        .map(|c| terms_of(&c.normalized_text))
        .collect();

    // Vocabulary over the whole batch, sorted for a stable dimension order.
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &docs {
        let unique: std::collections::BTreeSet<&str> =
            doc.iter().map(String::as_str).collect();
        for term in unique {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let vocab: BTreeMap<&str, usize> = df
        .keys()
        .enumerate()
        .map(|(i, &term)| (term, i))
        .collect();
    let n_docs = comments.len() as f64;
    let idf: Vec<f64> = df
        .values()
        .map(|&d| ((1.0 + n_docs) / (1.0 + d as f64)).ln() + 1.0)
        .collect();

    comments
        .iter()
        .zip(docs.iter())
        .map(|(c, doc)| {
            let mut values = vec![0.0; vocab.len()];
            for term in doc {
                let idx = vocab[term.as_str()];
                values[idx] += idf[idx];
            }
            CommentVector::from_raw(c.source.comment.comment_id(), values)
        })
        .collect()
}

#[derive(Deserialize)]
struct ExternalRow {
    comment_id: String,
    values: Vec<f64>,
}

fn external(comments: &[PreprocessedComment], path: &Path) -> Result<Vec<CommentVector>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: ExternalRow = serde_json::from_str(line).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        match dim {
            None => dim = Some(row.values.len()),
            Some(d) if d != row.values.len() => {
                return Err(Error::Artifact {
                    path: path.to_path_buf(),
                    message: format!(
                        "line {}: dimension {} differs from {}",
                        lineno + 1,
                        row.values.len(),
                        d
                    ),
                });
            }
            _ => {}
        }
        rows.insert(row.comment_id, row.values);
    }

    let missing: Vec<String> = comments
        .iter()
        .map(|c| c.source.comment.comment_id())
        .filter(|id| !rows.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingVectors {
            count: missing.len(),
            first: missing[0].clone(),
        });
    }

    Ok(comments
        .iter()
        .map(|c| {
            let id = c.source.comment.comment_id();
            let values = rows[&id].clone();
            CommentVector::from_raw(id, values)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::preprocess::preprocess_text;
    use crate::detect::SatdComment;
    use crate::types::{BuildTool, CommentSyntax, SourceComment};
    use std::collections::BTreeSet;

    fn pre(text: &str, line: usize) -> PreprocessedComment {
        preprocess_text(&SatdComment {
            comment: SourceComment {
                repo_id: "o/r".into(),
                relative_path: "f.cmake".into(),
                build_tool: BuildTool::Cmake,
                start_line: line,
                end_line: line,
                raw_text: text.into(),
                syntax: CommentSyntax::Hash,
            },
            matched_keywords: BTreeSet::from(["todo".to_string()]),
        })
    }

    #[test]
    fn identical_texts_have_cosine_one() {
        let batch = vec![pre("todo fix build", 1), pre("todo fix build", 2)];
        let vs = vectorize(&batch, &VectorizerBackend::TfIdf).unwrap();
        assert!((vs[0].cosine(&vs[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_texts_are_orthogonal() {
        let batch = vec![pre("alpha beta", 1), pre("gamma delta", 2)];
        let vs = vectorize(&batch, &VectorizerBackend::TfIdf).unwrap();
        assert_eq!(vs[0].cosine(&vs[1]), 0.0);
    }

    #[test]
    fn near_duplicates_match_hand_computed_tfidf() {
        // Two documents: "todo fix build" and "todo fix builds".
        // Shared terms (todo, fix, "todo fix") have df = 2 so idf = 1;
        // the four distinct terms have idf = 1 + ln(3/2). Cosine follows
        // as 3 / (3 + 2 * (1 + ln 1.5)^2).
        let batch = vec![pre("todo fix build", 1), pre("todo fix builds", 2)];
        let vs = vectorize(&batch, &VectorizerBackend::TfIdf).unwrap();
        let beta = 1.0 + 1.5f64.ln();
        let expected = 3.0 / (3.0 + 2.0 * beta * beta);
        let got = vs[0].cosine(&vs[1]);
        assert!((got - expected).abs() < 1e-12, "got {got}, want {expected}");
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn lowercased_equality_gives_equal_vectors() {
        let batch = vec![pre("TODO Fix Build", 1), pre("todo fix build", 2)];
        let vs = vectorize(&batch, &VectorizerBackend::TfIdf).unwrap();
        assert_eq!(vs[0].values, vs[1].values);
    }

    #[test]
    fn vectors_are_unit_length() {
        let batch = vec![pre("todo fix the build soon", 1), pre("hack around it", 2)];
        let vs = vectorize(&batch, &VectorizerBackend::TfIdf).unwrap();
        for v in &vs {
            let len: f64 = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            assert!(v.norm > 0.0);
        }
    }

    #[test]
    fn external_vectors_load_and_normalize() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.jsonl");
        let batch = vec![pre("todo fix", 1), pre("other text", 2)];
        let id0 = batch[0].source.comment.comment_id();
        let id1 = batch[1].source.comment.comment_id();
        std::fs::write(
            &path,
            format!(
                "{}\n{}\n",
                serde_json::json!({"comment_id": id0, "values": [3.0, 4.0]}),
                serde_json::json!({"comment_id": id1, "values": [0.0, 2.0]}),
            ),
        )
        .unwrap();
        let vs = vectorize(&batch, &VectorizerBackend::External(path)).unwrap();
        assert_eq!(vs[0].values, vec![0.6, 0.8]);
        assert_eq!(vs[0].norm, 5.0);
        assert_eq!(vs[1].values, vec![0.0, 1.0]);
    }

    #[test]
    fn external_missing_id_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.jsonl");
        std::fs::write(&path, "").unwrap();
        let batch = vec![pre("todo fix", 1)];
        let err = vectorize(&batch, &VectorizerBackend::External(path)).unwrap_err();
        assert!(matches!(err, Error::MissingVectors { count: 1, .. }));
    }

    #[test]
    fn external_dimension_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.jsonl");
        std::fs::write(
            &path,
            "{\"comment_id\":\"a\",\"values\":[1.0]}\n{\"comment_id\":\"b\",\"values\":[1.0,2.0]}\n",
        )
        .unwrap();
        let batch = vec![pre("todo fix", 1)];
        let err = vectorize(&batch, &VectorizerBackend::External(path)).unwrap_err();
        assert!(matches!(err, Error::Artifact { .. }));
    }

    #[test]
    fn backend_spec_parsing() {
        assert_eq!(
            VectorizerBackend::parse("tfidf").unwrap(),
            VectorizerBackend::TfIdf
        );
        assert_eq!(
            VectorizerBackend::parse("external:/tmp/v.jsonl").unwrap(),
            VectorizerBackend::External(PathBuf::from("/tmp/v.jsonl"))
        );
        assert!(VectorizerBackend::parse("sbert").is_err());
        assert!(VectorizerBackend::parse("external:").is_err());
    }
}
