//! Clone identification: similarity gating, density clustering over cosine
//! distance, cluster quality, human labels, prevalence, and dimension
//! classification.
//!
//! With `min_samples = 2` the clustering provably equals the connected
//! components (of size >= 2) of the graph that links vectors at cosine
//! distance <= eps; the property tests check exactly that equivalence
//! against a union-find oracle.

pub mod preprocess;
pub mod vectorize;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BuildTool, WarningRecord};

pub use preprocess::{drop_single_word, normalize_text, preprocess_text, PreprocessedComment};
pub use vectorize::{vectorize, CommentVector, VectorizerBackend};

/// Knobs for CI3/CI4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// CI3: a comment survives only if some other comment is at least this
    /// similar.
    pub similarity_gate: f64,
    /// CI4: neighborhood radius in cosine distance.
    pub eps: f64,
    /// CI4: minimum neighborhood population (including the point itself).
    pub min_samples: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            similarity_gate: 0.8,
            eps: 0.1,
            min_samples: 2,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.similarity_gate > 0.0 && self.similarity_gate < 1.0) {
            return Err(Error::Config(format!(
                "similarity gate must be in (0,1), got {}",
                self.similarity_gate
            )));
        }
        if !(self.eps > 0.0 && self.eps < 2.0) {
            return Err(Error::Config(format!(
                "eps must be in (0,2), got {}",
                self.eps
            )));
        }
        if self.min_samples < 2 {
            return Err(Error::Config(format!(
                "min_samples must be >= 2, got {}",
                self.min_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepoDimension {
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ToolDimension {
    SameTool,
    CrossTool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LanguageDimension {
    SameLanguage,
    CrossLanguage,
}

/// Human verdict from the CI5 labeling pass. Unlabeled groups count as SATD
/// downstream because only the top-ranked groups get human attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupLabel {
    Satd,
    FalsePositive,
    #[default]
    Unlabeled,
}

/// A cluster of near-duplicate SATD comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneGroup {
    pub group_id: String,
    /// At least two member comment ids, sorted.
    pub member_ids: Vec<String>,
    pub repo_dimension: Option<RepoDimension>,
    pub tool_dimension: Option<ToolDimension>,
    pub language_dimension: Option<LanguageDimension>,
    pub label: GroupLabel,
}

impl CloneGroup {
    /// Group with dimensions unset and no label.
    pub fn unclassified(group_id: impl Into<String>, mut member_ids: Vec<String>) -> Self {
        member_ids.sort();
        CloneGroup {
            group_id: group_id.into(),
            member_ids,
            repo_dimension: None,
            tool_dimension: None,
            language_dimension: None,
            label: GroupLabel::Unlabeled,
        }
    }

    /// False-positive groups drop out of downstream metrics.
    pub fn counts_as_satd(&self) -> bool {
        self.label != GroupLabel::FalsePositive
    }
}

/// CI3: keep exactly the vectors that have at least one other vector with
/// cosine similarity >= `gate`. The scan is parallel over rows but each
/// row's comparisons run in a fixed order, so the outcome is identical to
/// the naive quadratic pass.
pub fn similarity_gate(vectors: &[CommentVector], gate: f64) -> Vec<CommentVector> {
    let keep: Vec<bool> = (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            (0..vectors.len())
                .any(|j| j != i && vectors[i].cosine(&vectors[j]) >= gate)
        })
        .collect();
    vectors
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(v, _)| v.clone())
        .collect()
}

/// Drop zero vectors (empty text after preprocessing) ahead of CI3.
pub fn drop_zero_vectors(
    vectors: Vec<CommentVector>,
) -> (Vec<CommentVector>, Vec<WarningRecord>) {
    let mut kept = Vec::with_capacity(vectors.len());
    let mut warnings = Vec::new();
    for v in vectors {
        if v.norm > 0.0 {
            kept.push(v);
        } else {
            warnings.push(WarningRecord::new(
                "cluster",
                v.comment_id.clone(),
                "zero vector dropped before similarity gating",
            ));
        }
    }
    (kept, warnings)
}

/// CI4: DBSCAN over cosine distance.
///
/// A point is core iff its eps-neighborhood (itself included) holds at
/// least `min_samples` points; clusters are the maximal density-connected
/// sets through core points; everything else is noise and discarded.
/// Groups come out ordered by smallest member id, members sorted, and the
/// result does not depend on input order.
pub fn cluster(vectors: &[CommentVector], cfg: &ClusteringConfig) -> Result<Vec<CloneGroup>> {
    cfg.validate()?;
    // Sort by id so cluster shapes cannot depend on caller ordering.
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| vectors[a].comment_id.cmp(&vectors[b].comment_id));
    let pts: Vec<&CommentVector> = order.iter().map(|&i| &vectors[i]).collect();
    let n = pts.len();

    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| pts[i].cosine_distance(pts[j]) <= cfg.eps)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighborhoods
        .iter()
        .map(|nb| nb.len() >= cfg.min_samples)
        .collect();

    const UNVISITED: i64 = -2;
    const NOISE: i64 = -1;
    let mut labels = vec![UNVISITED; n];
    let mut next_cluster: i64 = 0;
    for i in 0..n {
        if labels[i] != UNVISITED {
            continue;
        }
        if !core[i] {
            labels[i] = NOISE;
            continue;
        }
        let cluster_id = next_cluster;
        next_cluster += 1;
        labels[i] = cluster_id;
        let mut frontier: Vec<usize> = neighborhoods[i].clone();
        while let Some(j) = frontier.pop() {
            if labels[j] == NOISE {
                labels[j] = cluster_id;
            }
            if labels[j] != UNVISITED {
                continue;
            }
            labels[j] = cluster_id;
            if core[j] {
                frontier.extend(neighborhoods[j].iter().copied());
            }
        }
    }

    let mut members: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    for (idx, &label) in labels.iter().enumerate() {
        if label >= 0 {
            members
                .entry(label)
                .or_default()
                .push(pts[idx].comment_id.clone());
        }
    }
    let mut groups: Vec<Vec<String>> = members
        .into_values()
        .map(|mut ids| {
            ids.sort();
            ids
        })
        .collect();
    groups.sort_by(|a, b| a[0].cmp(&b[0]));
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(i, ids)| CloneGroup::unclassified(format!("g{:04}", i + 1), ids))
        .collect())
}

/// Mean silhouette over clustered points with cosine distance: per point,
/// (b - a) / max(a, b) with `a` the mean intra-cluster distance and `b` the
/// smallest mean distance to another cluster; max(a, b) = 0 scores 0.
pub fn silhouette(vectors: &[CommentVector], groups: &[CloneGroup]) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(
            "silhouette needs at least 2 groups".into(),
        ));
    }
    let by_id: BTreeMap<&str, &CommentVector> = vectors
        .iter()
        .map(|v| (v.comment_id.as_str(), v))
        .collect();
    let clusters: Vec<Vec<&CommentVector>> = groups
        .iter()
        .map(|g| {
            g.member_ids
                .iter()
                .filter_map(|id| by_id.get(id.as_str()).copied())
                .collect()
        })
        .collect();
    if clusters.iter().any(|c| c.is_empty()) {
        return Err(Error::InsufficientData(
            "a group has no vectors to score".into(),
        ));
    }

    let mut total = 0.0;
    let mut count = 0usize;
    for (ci, members) in clusters.iter().enumerate() {
        for point in members {
            let a = if members.len() == 1 {
                0.0
            } else {
                members
                    .iter()
                    .filter(|other| other.comment_id != point.comment_id)
                    .map(|other| point.cosine_distance(other))
                    .sum::<f64>()
                    / (members.len() - 1) as f64
            };
            let b = clusters
                .iter()
                .enumerate()
                .filter(|(cj, _)| *cj != ci)
                .map(|(_, other)| {
                    other
                        .iter()
                        .map(|o| point.cosine_distance(o))
                        .sum::<f64>()
                        / other.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            let s = if members.len() == 1 || denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            };
            total += s;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// CI5: apply human labels from a `group_id,label` map. Unknown group ids
/// are an error; unlisted groups stay unlabeled.
pub fn apply_labels(
    mut groups: Vec<CloneGroup>,
    labels: &BTreeMap<String, GroupLabel>,
) -> Result<Vec<CloneGroup>> {
    let known: BTreeSet<&str> = groups.iter().map(|g| g.group_id.as_str()).collect();
    for id in labels.keys() {
        if !known.contains(id.as_str()) {
            return Err(Error::UnknownGroup(id.clone()));
        }
    }
    for g in &mut groups {
        if let Some(&label) = labels.get(&g.group_id) {
            g.label = label;
        }
    }
    Ok(groups)
}

/// Parse a labels CSV with a `group_id,label` header or bare rows.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, GroupLabel>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let mut out = BTreeMap::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if row.len() < 2 {
            continue;
        }
        let group_id = row[0].trim().to_string();
        let raw_label = row[1].trim();
        if idx == 0 && group_id.eq_ignore_ascii_case("group_id") {
            continue;
        }
        let label = match raw_label.to_ascii_uppercase().as_str() {
            "SATD" => GroupLabel::Satd,
            "FALSE_POSITIVE" => GroupLabel::FalsePositive,
            other => {
                return Err(Error::Artifact {
                    path: path.to_path_buf(),
                    message: format!("unknown label {other:?} for group {group_id}"),
                });
            }
        };
        out.insert(group_id, label);
    }
    Ok(out)
}

/// Prevalence of cloning: s_ci5 / (s_original - (s_ci4 - s_ci5)). The
/// subtraction removes the comments that human labeling rejected from both
/// sides of the fraction.
pub fn cloning_rate(s_original: u64, s_ci4: u64, s_ci5: u64) -> Result<f64> {
    if !(s_original >= s_ci4 && s_ci4 >= s_ci5) {
        return Err(Error::InvalidInput(format!(
            "stage counts must satisfy original >= ci4 >= ci5, got {s_original} >= {s_ci4} >= {s_ci5}"
        )));
    }
    let denominator = s_original as i64 - (s_ci4 as i64 - s_ci5 as i64);
    if denominator <= 0 {
        return Err(Error::InvalidInput(
            "cloning-rate denominator must be positive".into(),
        ));
    }
    Ok(s_ci5 as f64 / denominator as f64)
}

/// Member facts needed to classify a group: owning repo and build tool per
/// comment, and the primary language per repo.
#[derive(Debug, Clone)]
pub struct ProjectIndex {
    /// comment id -> (repo id, build tool)
    pub members: BTreeMap<String, (String, BuildTool)>,
    /// repo id -> primary language
    pub languages: BTreeMap<String, String>,
}

/// Set the repository/tool/language dimensions of a group.
pub fn classify_dimensions(mut group: CloneGroup, index: &ProjectIndex) -> Result<CloneGroup> {
    let mut repos = BTreeSet::new();
    let mut tools = BTreeSet::new();
    let mut languages = BTreeSet::new();
    for id in &group.member_ids {
        let (repo, tool) = index
            .members
            .get(id)
            .ok_or_else(|| Error::UnknownRepo(format!("no member metadata for {id}")))?;
        let language = index
            .languages
            .get(repo)
            .ok_or_else(|| Error::UnknownRepo(repo.clone()))?;
        repos.insert(repo.clone());
        tools.insert(*tool);
        languages.insert(language.clone());
    }
    group.repo_dimension = Some(if repos.len() == 1 {
        RepoDimension::Internal
    } else {
        RepoDimension::External
    });
    group.tool_dimension = Some(if tools.len() == 1 {
        ToolDimension::SameTool
    } else {
        ToolDimension::CrossTool
    });
    group.language_dimension = Some(if languages.len() == 1 {
        LanguageDimension::SameLanguage
    } else {
        LanguageDimension::CrossLanguage
    });
    Ok(group)
}
