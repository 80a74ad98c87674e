//! Keyword-based SATD detection and validation sampling.

use std::collections::BTreeSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::CloneGroup;
use crate::error::{Error, Result};
use crate::types::SourceComment;

/// How keyword patterns are located in comment text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Pattern must be delimited by non-word characters on both sides;
    /// avoids false positives like "prefix" matching "fix".
    #[default]
    WordBoundary,
    Substring,
}

/// Ordered, lowercase, deduplicated keyword patterns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    patterns: Vec<String>,
    pub match_mode: MatchMode,
}

/// Patterns bundled with the tool; superset of the keywords that matter for
/// the distribution plots (todo, fixme, fix, workaround, hack, xxx, broken).
const DEFAULT_KEYWORDS: &str = include_str!("../config/satd_keywords.txt");

impl KeywordSet {
    /// Lowercases, trims, and deduplicates patterns, keeping first-seen
    /// order. Errors when no pattern remains.
    pub fn new<I, S>(patterns: I, match_mode: MatchMode) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for p in patterns {
            let p = p.as_ref().trim().to_lowercase();
            if p.is_empty() {
                continue;
            }
            if seen.insert(p.clone()) {
                out.push(p);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("keyword set is empty".into()));
        }
        Ok(KeywordSet {
            patterns: out,
            match_mode,
        })
    }

    /// Load patterns from a file: one per line, `#`-prefixed lines ignored,
    /// lowercase enforced.
    pub fn from_file(path: &Path, match_mode: MatchMode) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_lines(&text, match_mode)
    }

    pub fn from_lines(text: &str, match_mode: MatchMode) -> Result<Self> {
        let lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Self::new(lines, match_mode)
    }

    /// The bundled default pattern list.
    pub fn bundled(match_mode: MatchMode) -> Self {
        Self::from_lines(DEFAULT_KEYWORDS, match_mode).expect("bundled keyword list is non-empty")
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    /// All patterns matching the comment text, in pattern order.
    pub fn matches(&self, text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        self.patterns
            .iter()
            .filter(|p| match self.match_mode {
                MatchMode::Substring => lower.contains(p.as_str()),
                MatchMode::WordBoundary => contains_bounded(&lower, p),
            })
            .cloned()
            .collect()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// True when `needle` occurs in `haystack` with non-word characters (or
/// string edges) on both sides.
fn contains_bounded(haystack: &str, needle: &str) -> bool {
    for (pos, _) in haystack.match_indices(needle) {
        let before_ok = haystack[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !is_word_char(c));
        let after_ok = haystack[pos + needle.len()..]
            .chars()
            .next()
            .is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return true;
        }
    }
    false
}

/// A comment tagged as self-admitted technical debt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatdComment {
    pub comment: SourceComment,
    /// Every pattern that matched, never empty.
    pub matched_keywords: BTreeSet<String>,
}

/// Tag a comment as SATD when at least one pattern matches its lowercased
/// text. Input order is preserved.
pub fn detect_satd(comments: &[SourceComment], kw: &KeywordSet) -> Vec<SatdComment> {
    comments
        .iter()
        .filter_map(|c| {
            let matched = kw.matches(&c.raw_text);
            if matched.is_empty() {
                None
            } else {
                Some(SatdComment {
                    comment: c.clone(),
                    matched_keywords: matched.into_iter().collect(),
                })
            }
        })
        .collect()
}

/// Cochran sample size with finite-population correction at p = 0.5,
/// rounded to the nearest integer (the convention of the survey-size
/// calculators this reproduces: N = 2,564,906 at 95%/0.05 gives 384).
pub fn sample_size(population: usize, confidence: f64, interval: f64) -> Result<usize> {
    if population == 0 {
        return Err(Error::InvalidInput("population is empty".into()));
    }
    if !(interval > 0.0 && interval < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence interval must be in (0,1), got {interval}"
        )));
    }
    let z = z_for_confidence(confidence)?;
    let n0 = z * z * 0.25 / (interval * interval);
    let n = n0 / (1.0 + (n0 - 1.0) / population as f64);
    Ok((n.round() as usize).clamp(1, population))
}

/// Standard-normal two-sided quantiles for the supported confidence levels.
fn z_for_confidence(confidence: f64) -> Result<f64> {
    const LEVELS: [(f64, f64); 3] = [
        (0.90, 1.644_853_626_951_472_2),
        (0.95, 1.959_963_984_540_054),
        (0.99, 2.575_829_303_548_900_4),
    ];
    for (level, z) in LEVELS {
        if (confidence - level).abs() < 1e-9 {
            return Ok(z);
        }
    }
    Err(Error::InvalidInput(format!(
        "confidence must be one of 0.90, 0.95, 0.99, got {confidence}"
    )))
}

/// Uniform sample without replacement for manual validation, deterministic
/// for a given seed. The result preserves population order.
pub fn sample_for_validation(
    population: &[SourceComment],
    confidence: f64,
    interval: f64,
    seed: u64,
) -> Result<Vec<SourceComment>> {
    let n = sample_size(population.len(), confidence, interval)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, population.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| population[i].clone()).collect())
}

/// For each keyword, the number of clone groups containing at least one
/// comment that matched it.
pub fn keyword_distribution(
    groups: &[CloneGroup],
    satd: &[SatdComment],
    kw: &KeywordSet,
) -> std::collections::BTreeMap<String, usize> {
    let by_id: std::collections::BTreeMap<String, &BTreeSet<String>> = satd
        .iter()
        .map(|s| (s.comment.comment_id(), &s.matched_keywords))
        .collect();
    let mut counts = std::collections::BTreeMap::new();
    for pattern in kw.patterns() {
        let n = groups
            .iter()
            .filter(|g| {
                g.member_ids
                    .iter()
                    .any(|id| by_id.get(id).is_some_and(|kws| kws.contains(pattern)))
            })
            .count();
        if n > 0 {
            counts.insert(pattern.clone(), n);
        }
    }
    counts
}
