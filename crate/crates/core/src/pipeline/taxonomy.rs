//! Closed annotation vocabulary for manually coded clone groups (location,
//! reason, purpose), plus frequency aggregation. Classification itself is
//! human work; the tool only validates labels and tabulates them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::CloneGroup;
use crate::error::{Error, Result};

/// Location categories and their subcategories.
pub const LOCATIONS: &[(&str, &[&str])] = &[
    (
        "externals",
        &[
            "platform configuration",
            "tool configuration",
            "libraries and plugins",
            "artifact versioning",
        ],
    ),
    (
        "behavioural",
        &[
            "dynamic settings",
            "build variables",
            "project metadata",
            "multi-directory configuration",
            "logging",
        ],
    ),
    (
        "file system",
        &["logical file system", "physical file system"],
    ),
];

/// Reason categories and their subcategories.
pub const REASONS: &[(&str, &[&str])] = &[
    (
        "limitation",
        &[
            "external tool limitation",
            "external library limitation",
            "build tool limitation",
        ],
    ),
    (
        "configuration",
        &[
            "compiler configuration",
            "symbol visibility",
            "platform-specific setting",
            "feature existence",
        ],
    ),
    (
        "dependency",
        &[
            "missing dependency",
            "internal dependency management",
            "dependency conflict",
        ],
    ),
    ("code smell", &[]),
    ("recursive call", &[]),
    ("document", &["specify metadata", "licensing"]),
    ("release and install behaviors", &["release", "post-install"]),
    ("no reason", &[]),
];

/// Purpose categories (flat).
pub const PURPOSES: &[&str] = &[
    "document for later fix",
    "warning for future developers",
    "document suboptimal implementation choice",
    "document workaround",
    "placeholder for later extension",
    "silence build warnings",
];

/// One manually coded group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyLabel {
    pub group_id: String,
    pub location: String,
    pub reason: String,
    pub purpose: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    /// "location" | "reason" | "purpose"
    pub dimension: String,
    pub category: String,
    /// Parent category for subcategory rows, empty for top-level rows.
    pub parent: String,
    pub count: usize,
    /// Whole percent of all labels in this dimension, rounded half away
    /// from zero.
    pub percent: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
    pub total_labels: usize,
}

fn known_term(vocab: &[(&str, &[&str])], term: &str) -> bool {
    vocab
        .iter()
        .any(|(cat, subs)| *cat == term || subs.contains(&term))
}

fn validate_term(dimension: &str, vocab: &[(&str, &[&str])], term: &str) -> Result<String> {
    let normalized = term.trim().to_lowercase();
    if known_term(vocab, &normalized) {
        Ok(normalized)
    } else {
        Err(Error::UnknownVocabulary {
            dimension: dimension.to_string(),
            term: term.to_string(),
        })
    }
}

fn purpose_vocab() -> Vec<(&'static str, &'static [&'static str])> {
    PURPOSES.iter().map(|&p| (p, &[] as &[&str])).collect()
}

/// Parse and validate a labels CSV with header
/// `group_id,location,reason,purpose`.
pub fn load_taxonomy_labels(path: &Path) -> Result<Vec<TaxonomyLabel>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let purposes = purpose_vocab();
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if row.len() < 4 {
            return Err(Error::Artifact {
                path: path.to_path_buf(),
                message: format!("expected 4 columns, got {}", row.len()),
            });
        }
        out.push(TaxonomyLabel {
            group_id: row[0].trim().to_string(),
            location: validate_term("location", LOCATIONS, &row[1])?,
            reason: validate_term("reason", REASONS, &row[2])?,
            purpose: validate_term("purpose", &purposes, &row[3])?,
        });
    }
    Ok(out)
}

/// Aggregate labels into per-category frequencies with parent rollups.
/// Labels must reference existing groups and vocabulary terms.
pub fn ingest_taxonomy(
    labels: &[TaxonomyLabel],
    groups: &[CloneGroup],
) -> Result<FrequencyTable> {
    let known_groups: std::collections::BTreeSet<&str> =
        groups.iter().map(|g| g.group_id.as_str()).collect();
    let purposes = purpose_vocab();
    for label in labels {
        if !known_groups.contains(label.group_id.as_str()) {
            return Err(Error::UnknownGroup(label.group_id.clone()));
        }
        validate_term("location", LOCATIONS, &label.location)?;
        validate_term("reason", REASONS, &label.reason)?;
        validate_term("purpose", &purposes, &label.purpose)?;
    }

    let total = labels.len();
    let mut rows = Vec::new();
    for (dimension, vocab, pick) in [
        (
            "location",
            LOCATIONS,
            Box::new(|l: &TaxonomyLabel| l.location.clone()) as Box<dyn Fn(&TaxonomyLabel) -> String>,
        ),
        ("reason", REASONS, Box::new(|l: &TaxonomyLabel| l.reason.clone())),
    ] {
        rows.extend(tabulate(dimension, vocab, labels, &pick, total));
    }
    // Purposes are flat.
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for label in labels {
        *counts.entry(label.purpose.as_str()).or_insert(0) += 1;
    }
    for &purpose in PURPOSES {
        let count = counts.get(purpose).copied().unwrap_or(0);
        if count > 0 {
            rows.push(FrequencyRow {
                dimension: "purpose".into(),
                category: purpose.into(),
                parent: String::new(),
                count,
                percent: percent_of(count, total),
            });
        }
    }
    Ok(FrequencyTable {
        rows,
        total_labels: total,
    })
}

fn tabulate(
    dimension: &str,
    vocab: &[(&str, &[&str])],
    labels: &[TaxonomyLabel],
    pick: &dyn Fn(&TaxonomyLabel) -> String,
    total: usize,
) -> Vec<FrequencyRow> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for label in labels {
        *counts.entry(pick(label)).or_insert(0) += 1;
    }
    let mut rows = Vec::new();
    for (category, subs) in vocab {
        let direct = counts.get(*category).copied().unwrap_or(0);
        let rolled: usize = subs
            .iter()
            .map(|s| counts.get(*s).copied().unwrap_or(0))
            .sum();
        let cat_total = direct + rolled;
        if cat_total > 0 {
            rows.push(FrequencyRow {
                dimension: dimension.into(),
                category: (*category).into(),
                parent: String::new(),
                count: cat_total,
                percent: percent_of(cat_total, total),
            });
        }
        for sub in *subs {
            let count = counts.get(*sub).copied().unwrap_or(0);
            if count > 0 {
                rows.push(FrequencyRow {
                    dimension: dimension.into(),
                    category: (*sub).into(),
                    parent: (*category).into(),
                    count,
                    percent: percent_of(count, total),
                });
            }
        }
    }
    rows
}

fn percent_of(count: usize, total: usize) -> u32 {
    if total == 0 {
        return 0;
    }
    (100.0 * count as f64 / total as f64).round() as u32
}
