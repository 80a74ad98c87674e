//! Command-line interface for the SATD clone mining pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use satd_miner::cluster::ClusteringConfig;
use satd_miner::detect::{self, MatchMode};
use satd_miner::pipeline::{Pipeline, PipelineConfig, RunSummary};
use satd_miner::stats;

#[derive(Parser)]
#[command(
    name = "satd-miner",
    version,
    about = "Mine build-system files for self-admitted technical debt clones"
)]
struct Cli {
    /// Pipeline configuration file (TOML or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts (overrides the config).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker cap for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for sampling operations.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct DetectArgs {
    /// Keyword file: one lowercase pattern per line, '#' comments ignored.
    #[arg(long)]
    keywords: Option<PathBuf>,

    /// Keyword matching mode.
    #[arg(long, value_parser = parse_match_mode)]
    match_mode: Option<MatchMode>,
}

#[derive(Args, Debug, Default)]
struct ClusterArgs {
    /// CI3 similarity gate.
    #[arg(long)]
    gate: Option<f64>,

    /// CI4 neighborhood radius in cosine distance.
    #[arg(long)]
    eps: Option<f64>,

    /// CI4 minimum neighborhood population.
    #[arg(long)]
    min_samples: Option<usize>,

    /// Vectorizer backend: `tfidf` or `external:<path>`.
    #[arg(long)]
    vectorizer: Option<String>,

    /// CI5 labels CSV (`group_id,label`).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the manifest, find build files, and apply the C1-C4 filters.
    Scan,
    /// Extract comments from the retained projects' build files.
    Extract,
    /// Tag SATD comments and select the adjacent non-SATD baseline.
    Detect(DetectArgs),
    /// Run clone identification (CI1-CI5) over SATD and baseline comments.
    Cluster(ClusterArgs),
    /// Compute surrounding-statement similarity per clone group.
    Context {
        /// Context lines taken above and below each comment.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Resolve introducing commits and authorship metrics per group.
    Authorship {
        /// Count commits-to-head over first-parent history.
        #[arg(long)]
        first_parent: Option<bool>,
    },
    /// Statistical comparisons over CSV columns.
    Stats {
        /// CSV with the SATD-side sample.
        #[arg(long)]
        satd: Option<PathBuf>,
        /// CSV with the baseline-side sample.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Column to compare (by header name).
        #[arg(long, default_value = "mean")]
        column: String,
        /// Run a one-way ANOVA across these CSVs instead.
        #[arg(long, num_args = 2..)]
        anova: Option<Vec<PathBuf>>,
    },
    /// Validate and aggregate taxonomy labels into a frequency table.
    Report {
        /// Taxonomy CSV: `group_id,location,reason,purpose`.
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Run the full pipeline end to end.
    Run {
        #[command(flatten)]
        detect: DetectArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long)]
        window: Option<usize>,
        /// Manifest path (overrides the config).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Draw a validation sample of non-SATD comments for manual review.
    Sample {
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, default_value_t = 0.05)]
        interval: f64,
    },
}

fn parse_match_mode(s: &str) -> Result<MatchMode, String> {
    match s {
        "word" => Ok(MatchMode::WordBoundary),
        "substring" => Ok(MatchMode::Substring),
        other => Err(format!("expected `word` or `substring`, got {other:?}")),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_detect_args(cfg: &mut PipelineConfig, args: &DetectArgs) {
    if let Some(kw) = &args.keywords {
        cfg.keywords_path = Some(kw.clone());
    }
    if let Some(mode) = args.match_mode {
        cfg.match_mode = mode;
    }
}

fn apply_cluster_args(cfg: &mut PipelineConfig, args: &ClusterArgs) {
    cfg.clustering = ClusteringConfig {
        similarity_gate: args.gate.unwrap_or(cfg.clustering.similarity_gate),
        eps: args.eps.unwrap_or(cfg.clustering.eps),
        min_samples: args.min_samples.unwrap_or(cfg.clustering.min_samples),
    };
    if let Some(v) = &args.vectorizer {
        cfg.vectorizer = v.clone();
    }
    if let Some(labels) = &args.labels {
        cfg.labels_path = Some(labels.clone());
    }
}

fn print_summary(summary: &RunSummary) {
    println!(
        "projects: {}/{} retained; comments: {}; satd: {}; groups: {} (baseline: {})",
        summary.projects_retained,
        summary.projects_in_manifest,
        summary.comments,
        summary.satd_comments,
        summary.satd_groups,
        summary.baseline_groups,
    );
    if let Some(s) = summary.satd_silhouette {
        println!("satd silhouette: {s:.4}");
    }
    if !summary.cached_stages.is_empty() {
        println!("cached stages reused: {}", summary.cached_stages.join(", "));
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = load_config(&cli)?;

    match &cli.command {
        Command::Scan => {
            let mut p = Pipeline::new(cfg)?;
            let scan = p.run_scan()?;
            println!(
                "retained {}/{} projects; {} build files",
                scan.retained.len(),
                scan.manifest.len(),
                scan.build_files.values().map(Vec::len).sum::<usize>()
            );
        }
        Command::Extract => {
            let mut p = Pipeline::new(cfg)?;
            let scan = p.load_scan().context("run `scan` first")?;
            let comments = p.run_extract(&scan)?;
            println!("extracted {} comments", comments.len());
        }
        Command::Detect(args) => {
            apply_detect_args(&mut cfg, args);
            let mut p = Pipeline::new(cfg)?;
            let comments = p.load_comments().context("run `extract` first")?;
            let (satd, baseline) = p.run_detect(&comments)?;
            println!(
                "{} SATD comments; {} baseline comments",
                satd.len(),
                baseline.len()
            );
        }
        Command::Cluster(args) => {
            apply_cluster_args(&mut cfg, args);
            let mut p = Pipeline::new(cfg)?;
            let scan = p.load_scan().context("run `scan` first")?;
            let (satd, baseline) = p.load_detect().context("run `detect` first")?;
            let (satd_ci, base_ci) = p.run_cluster(&satd, &baseline, &scan)?;
            println!(
                "{} SATD groups, {} baseline groups",
                satd_ci.groups.len(),
                base_ci.groups.len()
            );
            if let Some(s) = satd_ci.silhouette {
                println!("satd silhouette: {s:.4}");
            }
        }
        Command::Context { window } => {
            if let Some(w) = window {
                cfg.context_window = *w;
            }
            let mut p = Pipeline::new(cfg)?;
            let scan = p.load_scan().context("run `scan` first")?;
            let comments = p.load_comments().context("run `extract` first")?;
            let (satd, baseline) = p.load_detect().context("run `detect` first")?;
            let (satd_ci, base_ci) = p.load_cluster().context("run `cluster` first")?;
            let (satd_sims, base_sims) =
                p.run_context(&satd_ci, &base_ci, &satd, &baseline, &comments, &scan)?;
            println!(
                "context similarity for {} SATD groups, {} baseline groups",
                satd_sims.len(),
                base_sims.len()
            );
        }
        Command::Authorship { first_parent } => {
            if let Some(fp) = first_parent {
                cfg.first_parent = *fp;
            }
            let mut p = Pipeline::new(cfg)?;
            let scan = p.load_scan().context("run `scan` first")?;
            let (satd, baseline) = p.load_detect().context("run `detect` first")?;
            let (satd_ci, base_ci) = p.load_cluster().context("run `cluster` first")?;
            let out = p.run_authorship(&satd_ci, &base_ci, &satd, &baseline, &scan)?;
            println!(
                "authorship metrics for {} SATD groups, {} baseline groups",
                out.satd_metrics.len(),
                out.base_metrics.len()
            );
        }
        Command::Stats {
            satd,
            baseline,
            column,
            anova,
        } => {
            if let Some(inputs) = anova {
                let groups: Vec<Vec<f64>> = inputs
                    .iter()
                    .map(|p| read_column(p, column))
                    .collect::<anyhow::Result<_>>()?;
                let result = stats::one_way_anova(&groups)?;
                println!("method,statistic,p_value");
                println!("{},{},{}", result.method, result.statistic, result.p_value);
                return Ok(());
            }
            let (Some(satd_path), Some(base_path)) = (satd, baseline) else {
                bail!("either --anova or both --satd and --baseline are required");
            };
            let x = read_column(satd_path, column)?;
            let y = read_column(base_path, column)?;
            let test = stats::mann_whitney_u(&x, &y)?;
            let effect = stats::cliffs_delta(&x, &y)?;
            println!("comparison,method,statistic,p_value,delta,magnitude,significant@0.05");
            println!(
                "{column},{},{},{},{},{},{}",
                test.method,
                test.statistic,
                test.p_value,
                effect.delta,
                effect.magnitude.as_str(),
                test.significant_at(stats::ALPHA)
            );
        }
        Command::Report { taxonomy } => {
            if let Some(path) = taxonomy {
                cfg.taxonomy_path = Some(path.clone());
            }
            let mut p = Pipeline::new(cfg)?;
            let (satd_ci, _) = p.load_cluster().context("run `cluster` first")?;
            match p.run_taxonomy(&satd_ci.groups)? {
                Some(table) => println!(
                    "aggregated {} labels into {} frequency rows",
                    table.total_labels,
                    table.rows.len()
                ),
                None => bail!("no taxonomy file given (use --taxonomy or the config)"),
            }
        }
        Command::Run {
            detect,
            cluster,
            window,
            manifest,
        } => {
            apply_detect_args(&mut cfg, detect);
            apply_cluster_args(&mut cfg, cluster);
            if let Some(w) = window {
                cfg.context_window = *w;
            }
            if let Some(m) = manifest {
                cfg.manifest_path = m.clone();
            }
            let mut p = Pipeline::new(cfg)?;
            let summary = p.run()?;
            print_summary(&summary);
        }
        Command::Sample {
            confidence,
            interval,
        } => {
            let p = Pipeline::new(cfg.clone())?;
            let comments = p.load_comments().context("run `extract` first")?;
            let (satd, _) = p.load_detect().context("run `detect` first")?;
            let satd_ids: std::collections::BTreeSet<String> =
                satd.iter().map(|s| s.comment.comment_id()).collect();
            let population: Vec<_> = comments
                .into_iter()
                .filter(|c| !satd_ids.contains(&c.comment_id()))
                .collect();
            let sample =
                detect::sample_for_validation(&population, *confidence, *interval, cfg.seed)?;
            let rows: Vec<BTreeMap<&str, String>> = sample
                .iter()
                .map(|c| {
                    BTreeMap::from([
                        ("comment_id", c.comment_id()),
                        ("text", c.raw_text.clone()),
                    ])
                })
                .collect();
            let out = cfg.output_dir.join("validation_sample.jsonl");
            satd_miner::pipeline::artifacts::write_jsonl(&out, &rows)?;
            println!(
                "sampled {} of {} non-SATD comments -> {}",
                sample.len(),
                population.len(),
                out.display()
            );
        }
    }
    Ok(())
}

/// Read one numeric column from a CSV by header name.
fn read_column(path: &PathBuf, column: &str) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading CSV {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let idx = header
        .split(',')
        .position(|h| h == column)
        .with_context(|| format!("column {column:?} not found in {}", path.display()))?;
    let mut values = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if let Some(cell) = cells.get(idx) {
            if cell.is_empty() {
                continue;
            }
            values.push(
                cell.parse::<f64>()
                    .with_context(|| format!("bad number {cell:?} in {}", path.display()))?,
            );
        }
    }
    Ok(values)
}
