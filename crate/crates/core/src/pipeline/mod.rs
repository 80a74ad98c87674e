//! End-to-end orchestration: scan -> extract -> detect -> cluster ->
//! context -> authorship -> stats -> report, with every intermediate
//! artifact written to the output directory.
//!
//! Artifacts are deterministic: identical inputs and configuration produce
//! byte-identical files. Nothing derived from wall-clock time or absolute
//! paths is ever written, and every collection is sorted before
//! serialization. Stages record a content hash of their inputs in
//! `cache_manifest.json`; a rerun with an unchanged configuration
//! fingerprint reloads cached stage outputs instead of recomputing them.

pub mod artifacts;
pub mod baseline;
pub mod taxonomy;
pub mod timeline;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authorship::{
    self, git::GitHistoryProvider, GroupAuthorshipMetrics, HistoryProvider, IntroductionRecord,
};
use crate::cluster::{
    self, apply_labels, classify_dimensions, cloning_rate, drop_single_word, drop_zero_vectors,
    load_labels, preprocess_text, silhouette, similarity_gate, vectorize, CloneGroup,
    ClusteringConfig, ProjectIndex, VectorizerBackend,
};
use crate::context::{
    extract_context, group_similarity, vectorize_statements, GroupSimilarity, StatementBlock,
};
use crate::corpus::{
    self, filter_projects, identify_build_files, load_manifest, BuildFileRecord,
    FilenameConventions, FilterConfig, ProjectRecord,
};
use crate::detect::{detect_satd, KeywordSet, MatchMode, SatdComment};
use crate::error::{Error, Result};
use crate::extract::{extract_comments, read_lossy, ExtractOptions};
use crate::stats::{cliffs_delta, mann_whitney_u, ALPHA};
use crate::types::{BuildTool, SourceComment, WarningRecord};

use artifacts::{
    file_sha256, fmt_f64, read_json, read_jsonl, sha256_hex, write_bytes, write_csv, write_json,
    write_jsonl,
};

pub use taxonomy::{ingest_taxonomy, load_taxonomy_labels, FrequencyTable, TaxonomyLabel};
pub use timeline::{emit_timeline, TimelineRow};

/// Comparisons the stats stage runs, in output order.
pub const STATS_COMPARISONS: [&str; 8] = [
    "context_mean",
    "context_median",
    "uad",
    "mcd",
    "commits_to_head",
    "experience",
    "msg_mean",
    "msg_median",
];

/// Full pipeline configuration, loadable from TOML or JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub manifest_path: PathBuf,
    pub output_dir: PathBuf,
    pub filter: FilterConfig,
    /// Keyword file; the bundled list is used when absent.
    pub keywords_path: Option<PathBuf>,
    pub match_mode: MatchMode,
    pub clustering: ClusteringConfig,
    /// `tfidf` or `external:<path>`.
    pub vectorizer: String,
    pub context_window: usize,
    pub labels_path: Option<PathBuf>,
    pub taxonomy_path: Option<PathBuf>,
    /// Merge adjacent full-line comments during extraction.
    pub merge_adjacent_comments: bool,
    /// Build the adjacent non-SATD baseline and its analyses.
    pub baseline: bool,
    /// First-parent counting for commits-to-head distances.
    pub first_parent: bool,
    pub seed: u64,
    pub jobs: Option<usize>,
    /// Filename-convention overrides: tool name -> basename regexes.
    pub conventions: Option<BTreeMap<String, Vec<String>>>,
    /// Subset of [`STATS_COMPARISONS`] to run.
    pub stats_comparisons: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            manifest_path: PathBuf::new(),
            output_dir: PathBuf::from("out"),
            filter: FilterConfig::default(),
            keywords_path: None,
            match_mode: MatchMode::WordBoundary,
            clustering: ClusteringConfig::default(),
            vectorizer: "tfidf".into(),
            context_window: crate::context::DEFAULT_WINDOW,
            labels_path: None,
            taxonomy_path: None,
            merge_adjacent_comments: true,
            baseline: true,
            first_parent: true,
            seed: 0,
            jobs: None,
            conventions: None,
            stats_comparisons: STATS_COMPARISONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PipelineConfig {
    /// Parse a config file by extension (`.toml` or `.json`).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            _ => serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        };
        Ok(cfg)
    }

    /// Check referenced paths and threshold ranges before any stage runs.
    pub fn validate(&self) -> Result<()> {
        if !self.manifest_path.is_file() {
            return Err(Error::Config(format!(
                "manifest not found: {}",
                self.manifest_path.display()
            )));
        }
        for (label, path) in [
            ("keyword file", &self.keywords_path),
            ("labels file", &self.labels_path),
            ("taxonomy file", &self.taxonomy_path),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::Config(format!("{label} not found: {}", p.display())));
                }
            }
        }
        let backend = VectorizerBackend::parse(&self.vectorizer)?;
        if let VectorizerBackend::External(path) = &backend {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "external vector file not found: {}",
                    path.display()
                )));
            }
        }
        self.clustering.validate()?;
        if self.context_window == 0 {
            return Err(Error::Config("context window must be >= 1".into()));
        }
        for name in &self.stats_comparisons {
            if !STATS_COMPARISONS.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown stats comparison {name:?}")));
            }
        }
        if let Some(map) = &self.conventions {
            FilenameConventions::from_config(map)?;
        }
        Ok(())
    }

    /// Content-based fingerprint of everything that shapes the artifacts:
    /// parameters plus the contents (not paths) of referenced files.
    pub fn fingerprint(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Fingerprint<'a> {
            filter: &'a FilterConfig,
            match_mode: MatchMode,
            keywords_sha: String,
            clustering: &'a ClusteringConfig,
            vectorizer_kind: String,
            vectorizer_sha: String,
            context_window: usize,
            labels_sha: String,
            taxonomy_sha: String,
            merge_adjacent_comments: bool,
            baseline: bool,
            first_parent: bool,
            seed: u64,
            conventions: &'a Option<BTreeMap<String, Vec<String>>>,
            stats_comparisons: &'a [String],
        }
        let keywords_sha = match &self.keywords_path {
            Some(p) => file_sha256(p)?,
            None => "bundled".into(),
        };
        let (vectorizer_kind, vectorizer_sha) = match VectorizerBackend::parse(&self.vectorizer)? {
            VectorizerBackend::TfIdf => ("tfidf".to_string(), String::new()),
            VectorizerBackend::External(p) => ("external".to_string(), file_sha256(&p)?),
        };
        let labels_sha = match &self.labels_path {
            Some(p) => file_sha256(p)?,
            None => String::new(),
        };
        let taxonomy_sha = match &self.taxonomy_path {
            Some(p) => file_sha256(p)?,
            None => String::new(),
        };
        let fp = Fingerprint {
            filter: &self.filter,
            match_mode: self.match_mode,
            keywords_sha,
            clustering: &self.clustering,
            vectorizer_kind,
            vectorizer_sha,
            context_window: self.context_window,
            labels_sha,
            taxonomy_sha,
            merge_adjacent_comments: self.merge_adjacent_comments,
            baseline: self.baseline,
            first_parent: self.first_parent,
            seed: self.seed,
            conventions: &self.conventions,
            stats_comparisons: &self.stats_comparisons,
        };
        let canon = serde_json::to_string(&fp).map_err(|e| Error::Config(e.to_string()))?;
        Ok(sha256_hex(&[canon.as_bytes()]))
    }
}

/// Scan-stage output kept in memory between stages.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub manifest: Vec<ProjectRecord>,
    pub retained: Vec<ProjectRecord>,
    pub build_files: BTreeMap<String, Vec<BuildFileRecord>>,
    pub file_hashes: BTreeMap<String, String>,
}

impl ScanOutput {
    fn local_path(&self, repo_id: &str) -> Result<&Path> {
        self.retained
            .iter()
            .find(|p| p.repo_id == repo_id)
            .map(|p| p.local_path.as_path())
            .ok_or_else(|| Error::UnknownRepo(repo_id.to_string()))
    }
}

/// One clone-identification run (SATD or baseline side).
#[derive(Debug, Clone)]
pub struct CiOutput {
    pub groups: Vec<CloneGroup>,
    pub silhouette: Option<f64>,
    /// Stage label -> comment ids surviving that stage.
    pub stage_ids: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRecord {
    #[serde(flatten)]
    pub group: CloneGroup,
    pub representative_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClustersArtifact {
    pub groups: Vec<GroupRecord>,
    pub silhouette: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CacheManifest {
    config_fingerprint: String,
    stages: BTreeMap<String, String>,
}

/// Counts reported in the run manifest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub config_fingerprint: String,
    pub projects_in_manifest: usize,
    pub projects_retained: usize,
    pub comments: usize,
    pub satd_comments: usize,
    pub satd_groups: usize,
    pub satd_silhouette: Option<f64>,
    pub baseline_comments: usize,
    pub baseline_groups: usize,
    pub baseline_silhouette: Option<f64>,
    /// Stages served from cache in this process; not part of the artifact
    /// because a cached rerun must be byte-identical to a fresh run.
    #[serde(skip)]
    pub cached_stages: Vec<String>,
    pub stage_counts: Vec<CountRow>,
}

/// One row of the per-tool stage-count table. Rate rows store permille
/// values so the JSON stays integral; the CSV renders them as percents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub section: String,
    pub stage: String,
    pub per_tool: BTreeMap<String, u64>,
    pub sum: u64,
    pub repos: u64,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    keywords: KeywordSet,
    conventions: FilenameConventions,
    backend: VectorizerBackend,
    fingerprint: String,
    cache: CacheManifest,
    warnings: Vec<WarningRecord>,
    cached_stages: Vec<String>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let keywords = match &cfg.keywords_path {
            Some(p) => KeywordSet::from_file(p, cfg.match_mode)?,
            None => KeywordSet::bundled(cfg.match_mode),
        };
        let conventions = match &cfg.conventions {
            Some(map) => FilenameConventions::from_config(map)?,
            None => FilenameConventions::default(),
        };
        let backend = VectorizerBackend::parse(&cfg.vectorizer)?;
        let fingerprint = cfg.fingerprint()?;
        let cache_path = cfg.output_dir.join("cache_manifest.json");
        let cache = match read_json::<CacheManifest>(&cache_path) {
            Ok(loaded) if loaded.config_fingerprint == fingerprint => loaded,
            _ => CacheManifest {
                config_fingerprint: fingerprint.clone(),
                stages: BTreeMap::new(),
            },
        };
        if let Some(jobs) = cfg.jobs {
            // First initialization wins; later pipelines in-process reuse it.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
        Ok(Pipeline {
            cfg,
            keywords,
            conventions,
            backend,
            fingerprint,
            cache,
            warnings: Vec::new(),
            cached_stages: Vec::new(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn keywords(&self) -> &KeywordSet {
        &self.keywords
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            merge_adjacent: self.cfg.merge_adjacent_comments,
        }
    }

    fn cache_hit(&self, stage: &str, input_hash: &str, files: &[&str]) -> bool {
        self.cache.stages.get(stage).map(String::as_str) == Some(input_hash)
            && files.iter().all(|f| self.out(f).is_file())
    }

    fn record_stage(&mut self, stage: &str, input_hash: String) {
        self.cache.stages.insert(stage.to_string(), input_hash);
    }

    fn mark_partial(&self, stage: &str) -> Result<()> {
        write_bytes(&self.out(".partial"), format!("{stage}\n").as_bytes())
    }

    // ----- scan ------------------------------------------------------

    fn scan_input_hash(&self) -> Result<String> {
        let manifest_bytes = std::fs::read(&self.cfg.manifest_path)
            .map_err(|e| Error::io(&self.cfg.manifest_path, e))?;
        let filter = serde_json::to_string(&self.cfg.filter).unwrap_or_default();
        let conv = serde_json::to_string(&self.cfg.conventions).unwrap_or_default();
        Ok(sha256_hex(&[
            &manifest_bytes,
            filter.as_bytes(),
            conv.as_bytes(),
            &[self.cfg.merge_adjacent_comments as u8],
        ]))
    }

    pub fn run_scan(&mut self) -> Result<ScanOutput> {
        let hash = self.scan_input_hash()?;
        if self.cache_hit(
            "scan",
            &hash,
            &[
                "scan_report.json",
                "build_files.jsonl",
                "scan_file_hashes.json",
            ],
        ) {
            self.cached_stages.push("scan".into());
            return self.load_scan();
        }

        let manifest = load_manifest(&self.cfg.manifest_path)?;

        // Per-repository scans are independent; results merge back in
        // manifest order so the outcome stays deterministic.
        type ProjectScan = (String, Vec<BuildFileRecord>, Vec<WarningRecord>, Vec<(String, String)>);
        let scans: Vec<Result<Option<ProjectScan>>> = manifest
            .par_iter()
            .map(|project| {
                if !project.local_path.is_dir() {
                    return Ok(None);
                }
                let (files, warnings) = identify_build_files(
                    &project.local_path,
                    &project.repo_id,
                    &self.conventions,
                )?;
                let mut hashes = Vec::new();
                for f in &files {
                    let path = project.local_path.join(&f.relative_path);
                    let content = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    hashes.push((
                        format!("{}|{}", f.repo_id, f.relative_path),
                        sha256_hex(&[&content]),
                    ));
                }
                Ok(Some((project.repo_id.clone(), files, warnings, hashes)))
            })
            .collect();

        let mut build_files: BTreeMap<String, Vec<BuildFileRecord>> = BTreeMap::new();
        let mut file_hashes: BTreeMap<String, String> = BTreeMap::new();
        for (project, scan) in manifest.iter().zip(scans) {
            match scan? {
                Some((repo_id, files, warnings, hashes)) => {
                    self.warnings.extend(warnings);
                    file_hashes.extend(hashes);
                    build_files.insert(repo_id, files);
                }
                None => {
                    self.warnings.push(WarningRecord::new(
                        "scan",
                        project.repo_id.clone(),
                        "local checkout missing; project counts as zero build lines",
                    ));
                }
            }
        }

        let outcome = filter_projects(&manifest, &build_files, &self.cfg.filter);

        // Threshold curves over the inputs that feed C1/C3/C4.
        let commit_counts: Vec<u64> = manifest.iter().map(|p| p.commit_count).collect();
        let build_lines: Vec<u64> = manifest
            .iter()
            .map(|p| {
                build_files
                    .get(&p.repo_id)
                    .map(|fs| fs.iter().map(|f| f.line_count).sum())
                    .unwrap_or(0)
            })
            .collect();
        let comment_lines: Vec<u64> = manifest
            .iter()
            .map(|p| {
                build_files
                    .get(&p.repo_id)
                    .map(|fs| fs.iter().map(|f| f.comment_line_count).sum())
                    .unwrap_or(0)
            })
            .collect();
        #[derive(Serialize)]
        struct Curves {
            commit_count: Vec<(u64, usize)>,
            build_lines: Vec<(u64, usize)>,
            comment_lines: Vec<(u64, usize)>,
        }
        write_json(
            &self.out("threshold_curves.json"),
            &Curves {
                commit_count: corpus::threshold_curve(&commit_counts),
                build_lines: corpus::threshold_curve(&build_lines),
                comment_lines: corpus::threshold_curve(&comment_lines),
            },
        )?;

        #[derive(Serialize)]
        struct ScanReport<'a> {
            projects: &'a [corpus::CriterionReport],
        }
        write_json(
            &self.out("scan_report.json"),
            &ScanReport {
                projects: &outcome.report,
            },
        )?;
        let flat: Vec<&BuildFileRecord> = build_files.values().flatten().collect();
        write_jsonl(&self.out("build_files.jsonl"), &flat)?;
        write_json(&self.out("scan_file_hashes.json"), &file_hashes)?;

        self.record_stage("scan", hash);
        Ok(ScanOutput {
            retained: outcome.retained,
            manifest,
            build_files,
            file_hashes,
        })
    }

    pub fn load_scan(&self) -> Result<ScanOutput> {
        let manifest = load_manifest(&self.cfg.manifest_path)?;
        #[derive(Deserialize)]
        struct ScanReport {
            projects: Vec<corpus::CriterionReport>,
        }
        let report: ScanReport = read_json(&self.out("scan_report.json"))?;
        let retained_ids: BTreeSet<String> = report
            .projects
            .iter()
            .filter(|r| r.retained)
            .map(|r| r.repo_id.clone())
            .collect();
        let retained: Vec<ProjectRecord> = manifest
            .iter()
            .filter(|p| retained_ids.contains(&p.repo_id))
            .cloned()
            .collect();
        let files: Vec<BuildFileRecord> = read_jsonl(&self.out("build_files.jsonl"))?;
        let mut build_files: BTreeMap<String, Vec<BuildFileRecord>> = BTreeMap::new();
        for f in files {
            build_files.entry(f.repo_id.clone()).or_default().push(f);
        }
        let file_hashes: BTreeMap<String, String> = read_json(&self.out("scan_file_hashes.json"))?;
        Ok(ScanOutput {
            manifest,
            retained,
            build_files,
            file_hashes,
        })
    }

    // ----- extract ---------------------------------------------------

    fn extract_input_hash(&self) -> Result<String> {
        let bf = std::fs::read(self.out("build_files.jsonl"))
            .map_err(|e| Error::io(self.out("build_files.jsonl"), e))?;
        let fh = std::fs::read(self.out("scan_file_hashes.json"))
            .map_err(|e| Error::io(self.out("scan_file_hashes.json"), e))?;
        Ok(sha256_hex(&[
            &bf,
            &fh,
            &[self.cfg.merge_adjacent_comments as u8],
        ]))
    }

    pub fn run_extract(&mut self, scan: &ScanOutput) -> Result<Vec<SourceComment>> {
        let hash = self.extract_input_hash()?;
        if self.cache_hit("extract", &hash, &["comments.jsonl"]) {
            self.cached_stages.push("extract".into());
            return read_jsonl(&self.out("comments.jsonl"));
        }

        let opts = self.extract_options();
        let work: Vec<(&ProjectRecord, &BuildFileRecord)> = scan
            .retained
            .iter()
            .filter_map(|p| scan.build_files.get(&p.repo_id).map(|fs| (p, fs)))
            .flat_map(|(p, fs)| fs.iter().map(move |f| (p, f)))
            .collect();
        // Lexing is pure per file; the sort below fixes the order.
        let extracted: Vec<Result<Vec<SourceComment>>> = work
            .par_iter()
            .map(|(project, file)| {
                let contents = read_lossy(&project.local_path.join(&file.relative_path))?;
                extract_comments(file, &contents, &opts)
            })
            .collect();
        let mut comments = Vec::new();
        for batch in extracted {
            comments.extend(batch?);
        }
        comments.sort_by(|a, b| {
            (&a.repo_id, &a.relative_path, a.start_line, a.syntax).cmp(&(
                &b.repo_id,
                &b.relative_path,
                b.start_line,
                b.syntax,
            ))
        });
        write_jsonl(&self.out("comments.jsonl"), &comments)?;
        self.record_stage("extract", hash);
        Ok(comments)
    }

    pub fn load_comments(&self) -> Result<Vec<SourceComment>> {
        read_jsonl(&self.out("comments.jsonl"))
    }

    // ----- detect ----------------------------------------------------

    fn detect_input_hash(&self) -> Result<String> {
        let comments = std::fs::read(self.out("comments.jsonl"))
            .map_err(|e| Error::io(self.out("comments.jsonl"), e))?;
        let patterns = self.keywords.patterns().join("\n");
        Ok(sha256_hex(&[
            &comments,
            patterns.as_bytes(),
            format!("{:?}", self.keywords.match_mode).as_bytes(),
            &[self.cfg.baseline as u8],
        ]))
    }

    pub fn run_detect(
        &mut self,
        comments: &[SourceComment],
    ) -> Result<(Vec<SatdComment>, Vec<SourceComment>)> {
        let hash = self.detect_input_hash()?;
        if self.cache_hit("detect", &hash, &["satd.jsonl", "baseline_comments.jsonl"]) {
            self.cached_stages.push("detect".into());
            return Ok((
                read_jsonl(&self.out("satd.jsonl"))?,
                read_jsonl(&self.out("baseline_comments.jsonl"))?,
            ));
        }

        let satd = detect_satd(comments, &self.keywords);
        let satd_ids: BTreeSet<String> = satd.iter().map(|s| s.comment.comment_id()).collect();
        let baseline = if self.cfg.baseline {
            baseline::select_adjacent_non_satd(comments, &satd_ids)
        } else {
            Vec::new()
        };
        write_jsonl(&self.out("satd.jsonl"), &satd)?;
        write_jsonl(&self.out("baseline_comments.jsonl"), &baseline)?;
        self.record_stage("detect", hash);
        Ok((satd, baseline))
    }

    pub fn load_detect(&self) -> Result<(Vec<SatdComment>, Vec<SourceComment>)> {
        Ok((
            read_jsonl(&self.out("satd.jsonl"))?,
            read_jsonl(&self.out("baseline_comments.jsonl"))?,
        ))
    }

    // ----- cluster ---------------------------------------------------

    fn cluster_input_hash(&self) -> Result<String> {
        let satd = std::fs::read(self.out("satd.jsonl"))
            .map_err(|e| Error::io(self.out("satd.jsonl"), e))?;
        let base = std::fs::read(self.out("baseline_comments.jsonl"))
            .map_err(|e| Error::io(self.out("baseline_comments.jsonl"), e))?;
        let clustering = serde_json::to_string(&self.cfg.clustering).unwrap_or_default();
        let labels_sha = match &self.cfg.labels_path {
            Some(p) => file_sha256(p)?,
            None => String::new(),
        };
        let vec_sha = match &self.backend {
            VectorizerBackend::TfIdf => "tfidf".to_string(),
            VectorizerBackend::External(p) => file_sha256(p)?,
        };
        Ok(sha256_hex(&[
            &satd,
            &base,
            clustering.as_bytes(),
            labels_sha.as_bytes(),
            vec_sha.as_bytes(),
        ]))
    }

    /// The CI pipeline over one comment population. `apply_human_labels`
    /// is true only for the SATD side.
    fn ci_run(
        &mut self,
        items: Vec<SatdComment>,
        scan: &ScanOutput,
        apply_human_labels: bool,
        scope: &str,
    ) -> Result<CiOutput> {
        let mut stage_ids: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let ids_of = |items: &[SatdComment]| -> Vec<String> {
            items.iter().map(|c| c.comment.comment_id()).collect()
        };
        stage_ids.insert("raw".into(), ids_of(&items));

        // CI1: normalize and drop single-word comments.
        let preprocessed = drop_single_word(items.iter().map(preprocess_text).collect());
        stage_ids.insert(
            "ci1".into(),
            preprocessed
                .iter()
                .map(|p| p.source.comment.comment_id())
                .collect(),
        );

        let (gated, clustered_groups) = if preprocessed.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            // CI2: vectorize; zero vectors leave before the gate.
            let vectors = vectorize(&preprocessed, &self.backend)?;
            let (vectors, zero_warnings) = drop_zero_vectors(vectors);
            for mut w in zero_warnings {
                w.scope = format!("{scope}.cluster");
                self.warnings.push(w);
            }
            // CI3: similarity gate.
            let gated = similarity_gate(&vectors, self.cfg.clustering.similarity_gate);
            // CI4: density clustering.
            let groups = cluster::cluster(&gated, &self.cfg.clustering)?;
            (gated, groups)
        };
        stage_ids.insert(
            "ci3".into(),
            gated.iter().map(|v| v.comment_id.clone()).collect(),
        );
        stage_ids.insert(
            "ci4".into(),
            clustered_groups
                .iter()
                .flat_map(|g| g.member_ids.iter().cloned())
                .collect(),
        );

        // CI5: human labels (SATD side only).
        let labeled = if apply_human_labels {
            match &self.cfg.labels_path {
                Some(path) => apply_labels(clustered_groups, &load_labels(path)?)?,
                None => clustered_groups,
            }
        } else {
            clustered_groups
        };
        stage_ids.insert(
            "ci5".into(),
            labeled
                .iter()
                .filter(|g| g.counts_as_satd())
                .flat_map(|g| g.member_ids.iter().cloned())
                .collect(),
        );

        // Dimension classification.
        let index = ProjectIndex {
            members: items
                .iter()
                .map(|c| {
                    (
                        c.comment.comment_id(),
                        (c.comment.repo_id.clone(), c.comment.build_tool),
                    )
                })
                .collect(),
            languages: scan
                .manifest
                .iter()
                .map(|p| (p.repo_id.clone(), p.primary_language.clone()))
                .collect(),
        };
        let mut classified = Vec::with_capacity(labeled.len());
        for g in labeled {
            classified.push(classify_dimensions(g, &index)?);
        }

        let score = if classified.len() >= 2 {
            Some(silhouette(&gated, &classified)?)
        } else {
            None
        };
        Ok(CiOutput {
            groups: classified,
            silhouette: score,
            stage_ids,
        })
    }

    fn write_clusters(
        &self,
        name: &str,
        ci: &CiOutput,
        texts: &BTreeMap<String, &SourceComment>,
    ) -> Result<()> {
        let records: Vec<GroupRecord> = ci
            .groups
            .iter()
            .map(|g| {
                let representative_text = g
                    .member_ids
                    .iter()
                    .filter_map(|id| texts.get(id).map(|c| c.raw_text.clone()))
                    .min()
                    .unwrap_or_default();
                GroupRecord {
                    group: g.clone(),
                    representative_text,
                }
            })
            .collect();
        write_json(
            &self.out(name),
            &ClustersArtifact {
                groups: records,
                silhouette: ci.silhouette,
            },
        )
    }

    pub fn run_cluster(
        &mut self,
        satd: &[SatdComment],
        baseline_comments: &[SourceComment],
        scan: &ScanOutput,
    ) -> Result<(CiOutput, CiOutput)> {
        let hash = self.cluster_input_hash()?;
        let artifact_names = [
            "clusters.json",
            "baseline_clusters.json",
            "stage_counts.csv",
            "keyword_distribution.json",
            "stage_ids.json",
            "dimension_distribution.csv",
            "same_tool_distribution.csv",
        ];
        if self.cache_hit("cluster", &hash, &artifact_names) {
            self.cached_stages.push("cluster".into());
            return self.load_cluster();
        }

        let satd_ci = self.ci_run(satd.to_vec(), scan, true, "satd")?;
        let satd_texts: BTreeMap<String, &SourceComment> = satd
            .iter()
            .map(|s| (s.comment.comment_id(), &s.comment))
            .collect();
        self.write_clusters("clusters.json", &satd_ci, &satd_texts)?;

        // The baseline runs the same CI pipeline; its comments carry no
        // keyword matches.
        let baseline_items: Vec<SatdComment> = baseline_comments
            .iter()
            .map(|c| SatdComment {
                comment: c.clone(),
                matched_keywords: BTreeSet::new(),
            })
            .collect();
        let base_ci = self.ci_run(baseline_items, scan, false, "baseline")?;
        let base_texts: BTreeMap<String, &SourceComment> = baseline_comments
            .iter()
            .map(|c| (c.comment_id(), c))
            .collect();
        self.write_clusters("baseline_clusters.json", &base_ci, &base_texts)?;

        let distribution =
            crate::detect::keyword_distribution(&satd_ci.groups, satd, &self.keywords);
        write_json(&self.out("keyword_distribution.json"), &distribution)?;

        #[derive(Serialize)]
        struct StageIds<'a> {
            satd: &'a BTreeMap<String, Vec<String>>,
            baseline: &'a BTreeMap<String, Vec<String>>,
        }
        write_json(
            &self.out("stage_ids.json"),
            &StageIds {
                satd: &satd_ci.stage_ids,
                baseline: &base_ci.stage_ids,
            },
        )?;

        let rows = self.stage_count_rows(&satd_ci, &base_ci, satd, baseline_comments);
        let text_rows: Vec<Vec<String>> = rows.iter().map(render_count_row).collect();
        write_csv(
            &self.out("stage_counts.csv"),
            &[
                "section", "stage", "autotools", "cmake", "maven", "ant", "ivy", "sum", "repos",
            ],
            &text_rows,
        )?;

        // Dimension distributions (repository / tool / language) and the
        // per-tool spread of same-tool clones.
        let satd_tools: BTreeMap<String, BuildTool> = satd
            .iter()
            .map(|s| (s.comment.comment_id(), s.comment.build_tool))
            .collect();
        let base_tools: BTreeMap<String, BuildTool> = baseline_comments
            .iter()
            .map(|c| (c.comment_id(), c.build_tool))
            .collect();
        let mut dim_rows = dimension_rows("satd", &satd_ci.groups);
        dim_rows.extend(dimension_rows("baseline", &base_ci.groups));
        write_csv(
            &self.out("dimension_distribution.csv"),
            &[
                "section",
                "dimension",
                "value",
                "n_groups",
                "n_comments",
                "mean_size",
                "median_size",
                "max_size",
            ],
            &dim_rows,
        )?;
        let mut tool_rows = same_tool_rows("satd", &satd_ci.groups, &satd_tools);
        tool_rows.extend(same_tool_rows("baseline", &base_ci.groups, &base_tools));
        write_csv(
            &self.out("same_tool_distribution.csv"),
            &[
                "section",
                "tool",
                "n_groups",
                "n_comments",
                "mean_size",
                "median_size",
            ],
            &tool_rows,
        )?;

        self.record_stage("cluster", hash);
        Ok((satd_ci, base_ci))
    }

    /// Build the Table-1-shaped count rows for both populations.
    fn stage_count_rows(
        &self,
        satd_ci: &CiOutput,
        base_ci: &CiOutput,
        satd: &[SatdComment],
        baseline_comments: &[SourceComment],
    ) -> Vec<CountRow> {
        let satd_meta: BTreeMap<String, (&str, BuildTool)> = satd
            .iter()
            .map(|s| {
                (
                    s.comment.comment_id(),
                    (s.comment.repo_id.as_str(), s.comment.build_tool),
                )
            })
            .collect();
        let base_meta: BTreeMap<String, (&str, BuildTool)> = baseline_comments
            .iter()
            .map(|c| (c.comment_id(), (c.repo_id.as_str(), c.build_tool)))
            .collect();

        let mut rows = Vec::new();
        for stage in ["raw", "ci1", "ci3", "ci4", "ci5"] {
            rows.push(count_row(
                "satd",
                stage,
                satd_ci
                    .stage_ids
                    .get(stage)
                    .map(Vec::as_slice)
                    .unwrap_or(&[]),
                &satd_meta,
            ));
        }
        rows.push(rate_row("satd", &rows[0], &rows[3], &rows[4]));

        let start = rows.len();
        for (label, stage) in [("sample", "raw"), ("ci1", "ci1"), ("ci3", "ci3"), ("ci4", "ci4")]
        {
            rows.push(count_row(
                "baseline",
                label,
                base_ci
                    .stage_ids
                    .get(stage)
                    .map(Vec::as_slice)
                    .unwrap_or(&[]),
                &base_meta,
            ));
        }
        let sample = rows[start].clone();
        let ci4 = rows[start + 3].clone();
        rows.push(rate_row("baseline", &sample, &ci4, &ci4));
        rows
    }

    pub fn load_cluster(&self) -> Result<(CiOutput, CiOutput)> {
        #[derive(Deserialize)]
        struct StageIds {
            satd: BTreeMap<String, Vec<String>>,
            baseline: BTreeMap<String, Vec<String>>,
        }
        let ids: StageIds = read_json(&self.out("stage_ids.json"))?;
        let satd: ClustersArtifact = read_json(&self.out("clusters.json"))?;
        let base: ClustersArtifact = read_json(&self.out("baseline_clusters.json"))?;
        Ok((
            CiOutput {
                groups: satd.groups.into_iter().map(|r| r.group).collect(),
                silhouette: satd.silhouette,
                stage_ids: ids.satd,
            },
            CiOutput {
                groups: base.groups.into_iter().map(|r| r.group).collect(),
                silhouette: base.silhouette,
                stage_ids: ids.baseline,
            },
        ))
    }

    // ----- context ---------------------------------------------------

    #[allow(clippy::too_many_arguments)]
    fn context_for(
        &mut self,
        scope: &str,
        groups: &[CloneGroup],
        members: &BTreeMap<String, &SourceComment>,
        all_comments: &[SourceComment],
        scan: &ScanOutput,
        csv_name: &str,
        pairs_name: &str,
    ) -> Result<Vec<GroupSimilarity>> {
        // Comment spans per file, across every syntax.
        let mut spans: BTreeMap<(String, String), Vec<(usize, usize)>> = BTreeMap::new();
        for c in all_comments {
            spans
                .entry((c.repo_id.clone(), c.relative_path.clone()))
                .or_default()
                .push((c.start_line, c.end_line));
        }

        // Read every file the groups touch up front; the per-group pass is
        // then pure and can run in parallel.
        let mut file_cache: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        let live: Vec<&CloneGroup> = groups.iter().filter(|g| g.counts_as_satd()).collect();
        for group in &live {
            for id in &group.member_ids {
                let Some(comment) = members.get(id) else {
                    continue;
                };
                let key = (comment.repo_id.clone(), comment.relative_path.clone());
                if let std::collections::btree_map::Entry::Vacant(slot) = file_cache.entry(key)
                {
                    let root = scan.local_path(&comment.repo_id)?;
                    let contents = read_lossy(&root.join(&comment.relative_path))?;
                    slot.insert(contents.lines().map(str::to_string).collect());
                }
            }
        }

        let window = self.cfg.context_window;
        let empty = Vec::new();
        let similarities: Vec<(String, Result<GroupSimilarity>)> = live
            .par_iter()
            .map(|group| {
                let blocks: Vec<StatementBlock> = group
                    .member_ids
                    .iter()
                    .filter_map(|id| members.get(id))
                    .map(|comment| {
                        let key = (comment.repo_id.clone(), comment.relative_path.clone());
                        let lines = &file_cache[&key];
                        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
                        let file_spans = spans.get(&key).unwrap_or(&empty);
                        extract_context(&refs, comment, window, file_spans)
                    })
                    .collect();
                let vectors = vectorize_statements(&blocks);
                (
                    group.group_id.clone(),
                    group_similarity(&group.group_id, &vectors),
                )
            })
            .collect();

        let mut results = Vec::new();
        let mut pair_rows: Vec<serde_json::Value> = Vec::new();
        for (group_id, outcome) in similarities {
            match outcome {
                Ok(sim) => {
                    pair_rows.push(serde_json::json!({
                        "group_id": sim.group_id,
                        "scores": sim.pair_scores,
                    }));
                    results.push(sim);
                }
                Err(Error::InsufficientData(reason)) => {
                    self.warnings.push(WarningRecord::new(
                        format!("{scope}.context"),
                        group_id,
                        format!("group skipped: {reason}"),
                    ));
                }
                Err(other) => return Err(other),
            }
        }

        let csv_rows: Vec<Vec<String>> = results
            .iter()
            .map(|r| {
                vec![
                    r.group_id.clone(),
                    r.pair_scores.len().to_string(),
                    fmt_f64(r.mean),
                    fmt_f64(r.median),
                ]
            })
            .collect();
        write_csv(
            &self.out(csv_name),
            &["group_id", "n_pairs", "mean", "median"],
            &csv_rows,
        )?;
        write_jsonl(&self.out(pairs_name), &pair_rows)?;
        Ok(results)
    }

    pub fn run_context(
        &mut self,
        satd_ci: &CiOutput,
        base_ci: &CiOutput,
        satd: &[SatdComment],
        baseline_comments: &[SourceComment],
        all_comments: &[SourceComment],
        scan: &ScanOutput,
    ) -> Result<(Vec<GroupSimilarity>, Vec<GroupSimilarity>)> {
        let satd_members: BTreeMap<String, &SourceComment> = satd
            .iter()
            .map(|s| (s.comment.comment_id(), &s.comment))
            .collect();
        let satd_sims = self.context_for(
            "satd",
            &satd_ci.groups,
            &satd_members,
            all_comments,
            scan,
            "context_similarity.csv",
            "context_pairs.jsonl",
        )?;
        let base_members: BTreeMap<String, &SourceComment> = baseline_comments
            .iter()
            .map(|c| (c.comment_id(), c))
            .collect();
        let base_sims = self.context_for(
            "baseline",
            &base_ci.groups,
            &base_members,
            all_comments,
            scan,
            "baseline_context_similarity.csv",
            "baseline_context_pairs.jsonl",
        )?;
        Ok((satd_sims, base_sims))
    }

    // ----- authorship ------------------------------------------------

    #[allow(clippy::too_many_arguments)]
    fn authorship_for(
        &mut self,
        scope: &str,
        groups: &[CloneGroup],
        members: &BTreeMap<String, &SourceComment>,
        provider: &dyn HistoryProvider,
        cache: &mut BTreeMap<String, IntroductionRecord>,
        csv_name: &str,
    ) -> Result<AuthorshipSide> {
        let mut metrics = Vec::new();
        let mut deduped_by_group: BTreeMap<String, Vec<IntroductionRecord>> = BTreeMap::new();
        let mut msg_values = Vec::new();
        let mut csv_rows: Vec<Vec<String>> = Vec::new();
        for group in groups {
            if !group.counts_as_satd() {
                continue;
            }
            let mut records = Vec::new();
            for id in &group.member_ids {
                let Some(comment) = members.get(id) else {
                    continue;
                };
                records.push(authorship::resolve_introduction_cached(
                    comment, provider, cache,
                )?);
            }
            let deduped = authorship::dedupe_group(records);
            let m = authorship::group_metrics(&group.group_id, &deduped)?;
            let msg = match authorship::message_similarity(&deduped) {
                Ok(pair) => {
                    msg_values.push(pair);
                    Some(pair)
                }
                Err(Error::InsufficientData(reason)) => {
                    self.warnings.push(WarningRecord::new(
                        format!("{scope}.authorship"),
                        group.group_id.clone(),
                        format!("message similarity skipped: {reason}"),
                    ));
                    None
                }
                Err(other) => return Err(other),
            };
            csv_rows.push(vec![
                m.group_id.clone(),
                m.group_size_after_dedupe.to_string(),
                fmt_f64(m.uad),
                fmt_f64(m.mcd),
                m.single_author.to_string(),
                fmt_f64(m.median_commits_to_head),
                fmt_f64(m.median_author_experience),
                msg.map(|(mean, _)| fmt_f64(mean)).unwrap_or_default(),
                msg.map(|(_, median)| fmt_f64(median)).unwrap_or_default(),
            ]);
            metrics.push(m);
            deduped_by_group.insert(group.group_id.clone(), deduped);
        }
        write_csv(
            &self.out(csv_name),
            &[
                "group_id",
                "size",
                "uad",
                "mcd",
                "single_author",
                "median_commits_to_head",
                "median_experience",
                "msg_mean",
                "msg_median",
            ],
            &csv_rows,
        )?;
        Ok(AuthorshipSide {
            metrics,
            deduped_by_group,
            msg_values,
        })
    }

    pub fn run_authorship(
        &mut self,
        satd_ci: &CiOutput,
        base_ci: &CiOutput,
        satd: &[SatdComment],
        baseline_comments: &[SourceComment],
        scan: &ScanOutput,
    ) -> Result<AuthorshipOutput> {
        let repos: BTreeMap<String, PathBuf> = scan
            .retained
            .iter()
            .map(|p| (p.repo_id.clone(), p.local_path.clone()))
            .collect();
        let provider = GitHistoryProvider::new(repos, self.cfg.first_parent);

        // Hermetic reruns: resolved spans persist across runs.
        let cache_path = self.out("history_cache.jsonl");
        let mut cache: BTreeMap<String, IntroductionRecord> = if cache_path.is_file() {
            read_jsonl::<HistoryCacheRow>(&cache_path)?
                .into_iter()
                .map(|r| (r.key, r.record))
                .collect()
        } else {
            BTreeMap::new()
        };

        let satd_members: BTreeMap<String, &SourceComment> = satd
            .iter()
            .map(|s| (s.comment.comment_id(), &s.comment))
            .collect();
        prefetch_introductions(&satd_ci.groups, &satd_members, &provider, &mut cache)?;
        let satd_side = self.authorship_for(
            "satd",
            &satd_ci.groups,
            &satd_members,
            &provider,
            &mut cache,
            "authorship.csv",
        )?;

        // Timelines for the SATD groups.
        let stars: BTreeMap<String, u64> = scan
            .manifest
            .iter()
            .map(|p| (p.repo_id.clone(), p.stars))
            .collect();
        let tools: BTreeMap<String, BuildTool> = satd
            .iter()
            .map(|s| (s.comment.comment_id(), s.comment.build_tool))
            .collect();
        let mut timeline_rows: Vec<TimelineRow> = Vec::new();
        for group in &satd_ci.groups {
            if let Some(records) = satd_side.deduped_by_group.get(&group.group_id) {
                timeline_rows.extend(emit_timeline(group, records, &stars, &tools));
            }
        }
        write_jsonl(&self.out("timelines.jsonl"), &timeline_rows)?;

        // All resolved introductions, for downstream consumers.
        let mut introductions: Vec<&IntroductionRecord> =
            satd_side.deduped_by_group.values().flatten().collect();
        introductions.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
        write_jsonl(&self.out("introductions.jsonl"), &introductions)?;

        let base_members: BTreeMap<String, &SourceComment> = baseline_comments
            .iter()
            .map(|c| (c.comment_id(), c))
            .collect();
        prefetch_introductions(&base_ci.groups, &base_members, &provider, &mut cache)?;
        let base_side = self.authorship_for(
            "baseline",
            &base_ci.groups,
            &base_members,
            &provider,
            &mut cache,
            "baseline_authorship.csv",
        )?;

        let cache_rows: Vec<HistoryCacheRow> = cache
            .into_iter()
            .map(|(key, record)| HistoryCacheRow { key, record })
            .collect();
        write_jsonl(&cache_path, &cache_rows)?;
        Ok(AuthorshipOutput {
            satd_metrics: satd_side.metrics,
            base_metrics: base_side.metrics,
            satd_msgs: satd_side.msg_values,
            base_msgs: base_side.msg_values,
        })
    }

    // ----- stats -----------------------------------------------------

    pub fn run_stats(
        &mut self,
        satd_context: &[GroupSimilarity],
        base_context: &[GroupSimilarity],
        author: &AuthorshipOutput,
    ) -> Result<()> {
        let mut rows: Vec<Vec<String>> = Vec::new();
        for name in &self.cfg.stats_comparisons.clone() {
            let (x, y): (Vec<f64>, Vec<f64>) = match name.as_str() {
                "context_mean" => (
                    satd_context.iter().map(|g| g.mean).collect(),
                    base_context.iter().map(|g| g.mean).collect(),
                ),
                "context_median" => (
                    satd_context.iter().map(|g| g.median).collect(),
                    base_context.iter().map(|g| g.median).collect(),
                ),
                "uad" => (
                    author.satd_metrics.iter().map(|m| m.uad).collect(),
                    author.base_metrics.iter().map(|m| m.uad).collect(),
                ),
                "mcd" => (
                    author.satd_metrics.iter().map(|m| m.mcd).collect(),
                    author.base_metrics.iter().map(|m| m.mcd).collect(),
                ),
                "commits_to_head" => (
                    author
                        .satd_metrics
                        .iter()
                        .map(|m| m.median_commits_to_head)
                        .collect(),
                    author
                        .base_metrics
                        .iter()
                        .map(|m| m.median_commits_to_head)
                        .collect(),
                ),
                "experience" => (
                    author
                        .satd_metrics
                        .iter()
                        .map(|m| m.median_author_experience)
                        .collect(),
                    author
                        .base_metrics
                        .iter()
                        .map(|m| m.median_author_experience)
                        .collect(),
                ),
                "msg_mean" => (
                    author.satd_msgs.iter().map(|(m, _)| *m).collect(),
                    author.base_msgs.iter().map(|(m, _)| *m).collect(),
                ),
                "msg_median" => (
                    author.satd_msgs.iter().map(|(_, m)| *m).collect(),
                    author.base_msgs.iter().map(|(_, m)| *m).collect(),
                ),
                other => return Err(Error::Config(format!("unknown comparison {other:?}"))),
            };
            if x.is_empty() || y.is_empty() {
                self.warnings.push(WarningRecord::new(
                    "stats",
                    name.clone(),
                    "comparison skipped: empty sample on one side",
                ));
                continue;
            }
            let test = mann_whitney_u(&x, &y)?;
            let effect = cliffs_delta(&x, &y)?;
            rows.push(vec![
                name.clone(),
                test.method.clone(),
                fmt_f64(test.statistic),
                fmt_f64(test.p_value),
                fmt_f64(effect.delta),
                effect.magnitude.as_str().to_string(),
                test.significant_at(ALPHA).to_string(),
            ]);
        }
        write_csv(
            &self.out("stats.csv"),
            &[
                "comparison",
                "method",
                "statistic",
                "p_value",
                "delta",
                "magnitude",
                "significant@0.05",
            ],
            &rows,
        )
    }

    // ----- taxonomy --------------------------------------------------

    pub fn run_taxonomy(&mut self, groups: &[CloneGroup]) -> Result<Option<FrequencyTable>> {
        let Some(path) = self.cfg.taxonomy_path.clone() else {
            return Ok(None);
        };
        let labels = load_taxonomy_labels(&path)?;
        let table = ingest_taxonomy(&labels, groups)?;
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.dimension.clone(),
                    r.category.clone(),
                    r.parent.clone(),
                    r.count.to_string(),
                    format!("{}%", r.percent),
                ]
            })
            .collect();
        write_csv(
            &self.out("taxonomy_frequencies.csv"),
            &["dimension", "category", "parent", "count", "percent"],
            &rows,
        )?;
        Ok(Some(table))
    }

    // ----- full run --------------------------------------------------

    pub fn run(&mut self) -> Result<RunSummary> {
        self.mark_partial("scan")?;
        let scan = self.run_scan()?;

        self.mark_partial("extract")?;
        let comments = self.run_extract(&scan)?;

        self.mark_partial("detect")?;
        let (satd, baseline_comments) = self.run_detect(&comments)?;

        self.mark_partial("cluster")?;
        let (satd_ci, base_ci) = self.run_cluster(&satd, &baseline_comments, &scan)?;

        self.mark_partial("context")?;
        let (satd_context, base_context) = self.run_context(
            &satd_ci,
            &base_ci,
            &satd,
            &baseline_comments,
            &comments,
            &scan,
        )?;

        self.mark_partial("authorship")?;
        let author =
            self.run_authorship(&satd_ci, &base_ci, &satd, &baseline_comments, &scan)?;

        self.mark_partial("stats")?;
        self.run_stats(&satd_context, &base_context, &author)?;

        self.mark_partial("report")?;
        self.run_taxonomy(&satd_ci.groups)?;

        let summary = RunSummary {
            version: crate::VERSION.to_string(),
            config_fingerprint: self.fingerprint.clone(),
            projects_in_manifest: scan.manifest.len(),
            projects_retained: scan.retained.len(),
            comments: comments.len(),
            satd_comments: satd.len(),
            satd_groups: satd_ci.groups.iter().filter(|g| g.counts_as_satd()).count(),
            satd_silhouette: satd_ci.silhouette,
            baseline_comments: baseline_comments.len(),
            baseline_groups: base_ci.groups.len(),
            baseline_silhouette: base_ci.silhouette,
            cached_stages: self.cached_stages.clone(),
            stage_counts: self.stage_count_rows(&satd_ci, &base_ci, &satd, &baseline_comments),
        };
        write_json(&self.out("run_manifest.json"), &summary)?;

        let mut warnings = self.warnings.clone();
        warnings.sort_by(|a, b| (&a.scope, &a.subject).cmp(&(&b.scope, &b.subject)));
        write_jsonl(&self.out("warnings.jsonl"), &warnings)?;

        write_json(&self.out("cache_manifest.json"), &self.cache)?;
        let partial = self.out(".partial");
        if partial.exists() {
            std::fs::remove_file(&partial).map_err(|e| Error::io(&partial, e))?;
        }
        Ok(summary)
    }
}

/// Resolve every span the groups still need, in parallel, into the cache.
/// History queries are independent per member; merging back through the
/// ordered key map keeps the cache (and any error surfaced) deterministic.
fn prefetch_introductions(
    groups: &[CloneGroup],
    members: &BTreeMap<String, &SourceComment>,
    provider: &dyn HistoryProvider,
    cache: &mut BTreeMap<String, IntroductionRecord>,
) -> Result<()> {
    let mut pending: BTreeMap<String, &SourceComment> = BTreeMap::new();
    for group in groups {
        if !group.counts_as_satd() {
            continue;
        }
        for id in &group.member_ids {
            if let Some(comment) = members.get(id) {
                let key = format!(
                    "{}|{}|{}|{}",
                    comment.repo_id, comment.relative_path, comment.start_line, comment.end_line
                );
                if !cache.contains_key(&key) {
                    pending.entry(key).or_insert(comment);
                }
            }
        }
    }
    let entries: Vec<(&String, &&SourceComment)> = pending.iter().collect();
    let resolved: Vec<Result<IntroductionRecord>> = entries
        .par_iter()
        .map(|(_, member)| authorship::resolve_introduction(member, provider))
        .collect();
    for ((key, _), record) in entries.iter().zip(resolved) {
        cache.insert((*key).clone(), record?);
    }
    Ok(())
}

/// One population's authorship results.
struct AuthorshipSide {
    metrics: Vec<GroupAuthorshipMetrics>,
    deduped_by_group: BTreeMap<String, Vec<IntroductionRecord>>,
    msg_values: Vec<(f64, f64)>,
}

/// Authorship-stage output for both populations.
#[derive(Debug, Clone, Default)]
pub struct AuthorshipOutput {
    pub satd_metrics: Vec<GroupAuthorshipMetrics>,
    pub base_metrics: Vec<GroupAuthorshipMetrics>,
    pub satd_msgs: Vec<(f64, f64)>,
    pub base_msgs: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct HistoryCacheRow {
    key: String,
    record: IntroductionRecord,
}

fn count_row(
    section: &str,
    stage: &str,
    ids: &[String],
    meta: &BTreeMap<String, (&str, BuildTool)>,
) -> CountRow {
    let mut per_tool: BTreeMap<String, u64> = BTreeMap::new();
    let mut repos: BTreeSet<&str> = BTreeSet::new();
    for id in ids {
        if let Some((repo, tool)) = meta.get(id) {
            *per_tool.entry(tool.as_str().to_string()).or_insert(0) += 1;
            repos.insert(repo);
        }
    }
    CountRow {
        section: section.into(),
        stage: stage.into(),
        sum: ids.len() as u64,
        repos: repos.len() as u64,
        per_tool,
    }
}

/// Rate row in permille per tool; tools with nothing clustered are omitted
/// and render as `-`.
fn rate_row(section: &str, raw: &CountRow, ci4: &CountRow, ci5: &CountRow) -> CountRow {
    let mut per_tool = BTreeMap::new();
    for tool in BuildTool::ALL {
        let key = tool.as_str();
        let orig = raw.per_tool.get(key).copied().unwrap_or(0);
        let c4 = ci4.per_tool.get(key).copied().unwrap_or(0);
        let c5 = ci5.per_tool.get(key).copied().unwrap_or(0);
        if c4 == 0 {
            continue;
        }
        if let Ok(rate) = cloning_rate(orig, c4, c5) {
            per_tool.insert(key.to_string(), (rate * 1000.0).round() as u64);
        }
    }
    CountRow {
        section: section.into(),
        stage: "cloning_rate".into(),
        per_tool,
        sum: 0,
        repos: 0,
    }
}

/// Summary of the group sizes behind one dimension value.
fn size_summary(sizes: &[usize]) -> (f64, f64, usize) {
    let as_f64: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let mean = as_f64.iter().sum::<f64>() / as_f64.len() as f64;
    let median = crate::context::median(&as_f64);
    let max = sizes.iter().copied().max().unwrap_or(0);
    (mean, median, max)
}

type DimensionPick = Box<dyn Fn(&CloneGroup) -> Option<String>>;

fn dimension_rows(section: &str, groups: &[CloneGroup]) -> Vec<Vec<String>> {
    let live: Vec<&CloneGroup> = groups.iter().filter(|g| g.counts_as_satd()).collect();
    let mut rows = Vec::new();
    let dims: [(&str, DimensionPick); 3] = [
        (
            "repository",
            Box::new(|g| g.repo_dimension.map(|d| format!("{d:?}").to_uppercase())),
        ),
        (
            "tool",
            Box::new(|g| {
                g.tool_dimension.map(|d| match d {
                    cluster::ToolDimension::SameTool => "SAME_TOOL".to_string(),
                    cluster::ToolDimension::CrossTool => "CROSS_TOOL".to_string(),
                })
            }),
        ),
        (
            "language",
            Box::new(|g| {
                g.language_dimension.map(|d| match d {
                    cluster::LanguageDimension::SameLanguage => "SAME_LANGUAGE".to_string(),
                    cluster::LanguageDimension::CrossLanguage => "CROSS_LANGUAGE".to_string(),
                })
            }),
        ),
    ];
    for (name, pick) in dims {
        let mut by_value: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for g in &live {
            if let Some(value) = pick(g) {
                by_value.entry(value).or_default().push(g.member_ids.len());
            }
        }
        for (value, sizes) in by_value {
            let (mean, median, max) = size_summary(&sizes);
            rows.push(vec![
                section.to_string(),
                name.to_string(),
                value,
                sizes.len().to_string(),
                sizes.iter().sum::<usize>().to_string(),
                fmt_f64(mean),
                fmt_f64(median),
                max.to_string(),
            ]);
        }
    }
    rows
}

fn same_tool_rows(
    section: &str,
    groups: &[CloneGroup],
    tools: &BTreeMap<String, BuildTool>,
) -> Vec<Vec<String>> {
    let mut by_tool: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for g in groups {
        if !g.counts_as_satd() || g.tool_dimension != Some(cluster::ToolDimension::SameTool) {
            continue;
        }
        let Some(tool) = g.member_ids.first().and_then(|id| tools.get(id)) else {
            continue;
        };
        by_tool
            .entry(tool.as_str())
            .or_default()
            .push(g.member_ids.len());
    }
    let mut rows = Vec::new();
    for tool in BuildTool::ALL {
        if let Some(sizes) = by_tool.get(tool.as_str()) {
            let (mean, median, _) = size_summary(sizes);
            rows.push(vec![
                section.to_string(),
                tool.as_str().to_string(),
                sizes.len().to_string(),
                sizes.iter().sum::<usize>().to_string(),
                fmt_f64(mean),
                fmt_f64(median),
            ]);
        }
    }
    rows
}

fn render_count_row(row: &CountRow) -> Vec<String> {
    let mut out = vec![row.section.clone(), row.stage.clone()];
    if row.stage == "cloning_rate" {
        for tool in BuildTool::ALL {
            out.push(match row.per_tool.get(tool.as_str()) {
                Some(&permille) => format!("{}%", (permille as f64 / 10.0).round()),
                None => "-".into(),
            });
        }
        out.push("-".into());
        out.push("-".into());
    } else {
        for tool in BuildTool::ALL {
            out.push(
                row.per_tool
                    .get(tool.as_str())
                    .copied()
                    .unwrap_or(0)
                    .to_string(),
            );
        }
        out.push(row.sum.to_string());
        out.push(row.repos.to_string());
    }
    out
}

/// Convenience entry point: run the whole pipeline for a config.
pub fn run_pipeline(cfg: PipelineConfig) -> Result<RunSummary> {
    Pipeline::new(cfg)?.run()
}
