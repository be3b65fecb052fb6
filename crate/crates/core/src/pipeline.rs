//! Stage drivers for the end-to-end workflow. Each stage reads canonical
//! intermediate files from the run directory and writes its own, so stages
//! can be rerun independently and reruns are byte-identical.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    density_threshold, export_graph, knn_table, knn_with_metric, mismatches_by_level,
    similarity_matrix, write_edge_list_csv, write_edge_list_gexf, KnnReport, Mismatch,
};
use crate::classifier::{
    format_report, holdout_eval, kfold_cv, ClassificationReport, Dataset,
};
use crate::config::PipelineConfig;
use crate::context_gen::{
    news_context_sets, read_context_sets_jsonl, returns_context_sets, write_context_sets_jsonl,
};
use crate::corpus::{
    build_universe, compute_returns, load_labels, load_news, load_prices, LabeledCompany,
    NewsArticle, PricePanel,
};
use crate::embedder::{
    concat_embeddings, read_embeddings_tsv, train, write_embeddings_tsv, write_loss_trace_csv,
    EmbeddingMatrix,
};
use crate::synth::{generate, labels_csv, write_files, SynthPaths, SyntheticSpec};
use crate::{Error, Result};

pub const UNIVERSE_FILE: &str = "universe.csv";
pub const PRICES_FILE: &str = "prices.csv";
pub const ARTICLES_FILE: &str = "articles.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Which modality a train run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainModality {
    Returns,
    News,
    Both,
}

/// Which embedding file an analytics or classification stage consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingVariant {
    Returns,
    News,
    Multimodal,
}

impl EmbeddingVariant {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingVariant::Returns => "returns",
            EmbeddingVariant::News => "news",
            EmbeddingVariant::Multimodal => "multimodal",
        }
    }

    pub fn embeddings_file(&self) -> String {
        format!("embeddings_{}.tsv", self.name())
    }
}

fn contexts_file(modality: &str) -> String {
    format!("contexts_{modality}.jsonl")
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Manifest {
    config_sha256: String,
    tool_version: String,
    stages: BTreeMap<String, String>,
}

fn update_manifest(cfg: &PipelineConfig, stage: &str) -> Result<()> {
    let path = cfg.paths.output_dir.join(MANIFEST_FILE);
    let mut manifest = std::fs::read_to_string(&path)
        .ok()
        .and_then(|text| serde_json::from_str::<Manifest>(&text).ok())
        .unwrap_or_default();
    manifest.config_sha256 = cfg.fingerprint();
    manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
    manifest
        .stages
        .insert(stage.to_string(), env!("CARGO_PKG_VERSION").to_string());
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Validation(format!("cannot serialize manifest: {e}")))?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

fn ensure_output_dir(cfg: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.paths.output_dir)
        .map_err(|e| Error::io(&cfg.paths.output_dir, e))
}

#[derive(Serialize, Deserialize)]
struct StoredArticle {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    date: Option<String>,
    mentions: Vec<String>,
}

fn write_articles_jsonl(path: &Path, articles: &[NewsArticle], tickers: &[String]) -> Result<()> {
    let mut out = String::new();
    for article in articles {
        let stored = StoredArticle {
            id: article.article_id.clone(),
            date: article.date.map(|d| d.format("%Y-%m-%d").to_string()),
            mentions: article.mentions.iter().map(|&m| tickers[m].clone()).collect(),
        };
        out.push_str(&serde_json::to_string(&stored).expect("article serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_articles_jsonl(path: &Path, tickers: &[String]) -> Result<Vec<NewsArticle>> {
    let index: BTreeMap<&str, usize> = tickers
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut articles = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let stored: StoredArticle = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, lineno, format!("bad stored article: {e}")))?;
        let date = match stored.date {
            Some(ref s) => Some(NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| {
                Error::parse(path, lineno, format!("bad date {s:?}: {e}"))
            })?),
            None => None,
        };
        let mentions = stored
            .mentions
            .iter()
            .map(|t| {
                index.get(t.as_str()).copied().ok_or_else(|| {
                    Error::parse(path, lineno, format!("ticker {t:?} not in universe"))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        articles.push(NewsArticle {
            article_id: stored.id,
            date,
            text: String::new(),
            mentions,
        });
    }
    Ok(articles)
}

/// Loads the persisted universe and its aligned price panel.
fn load_run_inputs(cfg: &PipelineConfig) -> Result<(Vec<LabeledCompany>, PricePanel)> {
    let universe_path = cfg.paths.output_dir.join(UNIVERSE_FILE);
    if !universe_path.exists() {
        return Err(Error::Validation(format!(
            "{} not found; run the ingest stage first",
            universe_path.display()
        )));
    }
    let labels = load_labels(&universe_path)?;
    let load = load_prices(&cfg.paths.output_dir.join(PRICES_FILE))?;
    let tickers: Vec<&String> = labels.companies.iter().map(|c| &c.ticker).collect();
    let panel_tickers: Vec<&String> = load.panel.tickers().iter().collect();
    if tickers != panel_tickers {
        return Err(Error::Validation(
            "universe.csv and prices.csv disagree on the company ordering".into(),
        ));
    }
    Ok((labels.companies, load.panel))
}

#[derive(Debug)]
pub struct IngestSummary {
    pub universe_size: usize,
    pub sector_distribution: Vec<(String, usize)>,
    pub articles_kept: usize,
    pub articles_skipped: usize,
    pub excluded_price_tickers: Vec<String>,
    pub dropped_companies: Vec<(String, String)>,
}

/// Loads raw inputs, applies the inclusion criterion, and persists the
/// canonical intermediates (`universe.csv`, `prices.csv`, `articles.jsonl`).
pub fn run_ingest(cfg: &PipelineConfig) -> Result<IngestSummary> {
    ensure_output_dir(cfg)?;
    let labels = load_labels(&cfg.paths.labels)?;
    let price_load = load_prices(&cfg.paths.prices)?;

    let labeled: BTreeMap<&str, &LabeledCompany> = labels
        .companies
        .iter()
        .map(|c| (c.ticker.as_str(), c))
        .collect();
    let panel = price_load.panel;
    let mut unlabeled = Vec::new();
    for t in panel.tickers() {
        if !labeled.contains_key(t.as_str()) {
            unlabeled.push(t.clone());
        }
    }
    let panel = if unlabeled.is_empty() {
        panel
    } else {
        let keep: Vec<bool> = panel
            .tickers()
            .iter()
            .map(|t| labeled.contains_key(t.as_str()))
            .collect();
        panel.retain_rows(&|i| keep[i])?
    };
    let pre_universe: Vec<LabeledCompany> = panel
        .tickers()
        .iter()
        .map(|t| (*labeled.get(t.as_str()).expect("filtered above")).clone())
        .collect();

    let pattern = cfg.universe.pattern()?;
    let news_load = load_news(&cfg.paths.news, &pattern, &pre_universe)?;
    let build = build_universe(
        &panel,
        &news_load.articles,
        &labels.companies,
        cfg.universe.min_mentions,
    )?;

    let universe_tickers: Vec<String> =
        build.universe.iter().map(|c| c.ticker.clone()).collect();
    let universe_path = cfg.paths.output_dir.join(UNIVERSE_FILE);
    std::fs::write(
        &universe_path,
        labels_csv(&build.universe, &labels.sector1_values),
    )
    .map_err(|e| Error::io(&universe_path, e))?;

    let prices_path = cfg.paths.output_dir.join(PRICES_FILE);
    let mut prices_out = String::from("date");
    for t in &universe_tickers {
        prices_out.push(',');
        prices_out.push_str(t);
    }
    prices_out.push('\n');
    for (d, date) in build.panel.dates().iter().enumerate() {
        prices_out.push_str(&date.format("%Y-%m-%d").to_string());
        for i in 0..build.panel.num_companies() {
            prices_out.push(',');
            prices_out.push_str(&format!("{}", build.panel.row(i)[d]));
        }
        prices_out.push('\n');
    }
    std::fs::write(&prices_path, prices_out).map_err(|e| Error::io(&prices_path, e))?;

    write_articles_jsonl(
        &cfg.paths.output_dir.join(ARTICLES_FILE),
        &build.articles,
        &universe_tickers,
    )?;
    update_manifest(cfg, "ingest")?;

    let mut sector_distribution: BTreeMap<String, usize> = BTreeMap::new();
    for c in &build.universe {
        *sector_distribution.entry(c.sector1.clone()).or_default() += 1;
    }
    let mut dropped = build.dropped;
    dropped.extend(
        unlabeled
            .into_iter()
            .map(|t| (t, "no label row".to_string())),
    );
    dropped.sort();
    Ok(IngestSummary {
        universe_size: build.universe.len(),
        sector_distribution: sector_distribution.into_iter().collect(),
        articles_kept: build.articles.len(),
        articles_skipped: news_load.skipped.len(),
        excluded_price_tickers: price_load.excluded,
        dropped_companies: dropped,
    })
}

#[derive(Debug)]
pub struct ContextsSummary {
    pub returns_sets: usize,
    pub news_sets: usize,
    /// Fraction of (company, period) pairs surviving the IQR filter.
    pub iqr_retention: f64,
}

/// Generates and persists the per-modality context-set files.
pub fn run_contexts(cfg: &PipelineConfig) -> Result<ContextsSummary> {
    let (universe, panel) = load_run_inputs(cfg)?;
    let tickers: Vec<String> = universe.iter().map(|c| c.ticker.clone()).collect();
    let articles = read_articles_jsonl(&cfg.paths.output_dir.join(ARTICLES_FILE), &tickers)?;

    let returns = compute_returns(&panel);
    let gen_cfg = cfg.contexts.to_gen_config();
    let returns_sets = returns_context_sets(&returns, &gen_cfg)?;
    let news_sets = news_context_sets(&articles, &tickers);

    write_context_sets_jsonl(
        &cfg.paths.output_dir.join(contexts_file("returns")),
        &returns_sets,
        &tickers,
        panel.dates(),
    )?;
    write_context_sets_jsonl(
        &cfg.paths.output_dir.join(contexts_file("news")),
        &news_sets,
        &tickers,
        panel.dates(),
    )?;
    update_manifest(cfg, "contexts")?;

    let total = panel.num_companies() * panel.num_periods();
    Ok(ContextsSummary {
        returns_sets: returns_sets.len(),
        news_sets: news_sets.len(),
        iqr_retention: returns_sets.len() as f64 / total as f64,
    })
}

#[derive(Debug)]
pub struct TrainSummary {
    /// (modality, training sets, final mean loss) per trained model.
    pub trained: Vec<(String, usize, f64)>,
    pub multimodal_written: bool,
}

/// Trains the requested modality models and refreshes the concatenated
/// multimodal embeddings whenever both per-modality files exist.
pub fn run_train(cfg: &PipelineConfig, modality: TrainModality) -> Result<TrainSummary> {
    let (universe, panel) = load_run_inputs(cfg)?;
    let tickers: Vec<String> = universe.iter().map(|c| c.ticker.clone()).collect();

    let mut trained = Vec::new();
    let jobs: &[(&str, &crate::config::TrainSection)] = match modality {
        TrainModality::Returns => &[("returns", &cfg.train_returns)],
        TrainModality::News => &[("news", &cfg.train_news)],
        TrainModality::Both => &[
            ("returns", &cfg.train_returns),
            ("news", &cfg.train_news),
        ],
    };
    for (name, section) in jobs {
        let sets = read_context_sets_jsonl(
            &cfg.paths.output_dir.join(contexts_file(name)),
            &tickers,
            panel.dates(),
        )?;
        let train_cfg = section.to_train_config();
        let out = train(&sets, &tickers, &train_cfg)?;
        write_embeddings_tsv(
            &cfg.paths.output_dir.join(format!("embeddings_{name}.tsv")),
            &out.embeddings,
        )?;
        write_loss_trace_csv(
            &cfg.paths.output_dir.join(format!("loss_{name}.csv")),
            &out.loss_trace,
        )?;
        trained.push((
            name.to_string(),
            sets.len(),
            out.loss_trace.last().copied().unwrap_or(f64::NAN),
        ));
    }

    let returns_path = cfg
        .paths
        .output_dir
        .join(EmbeddingVariant::Returns.embeddings_file());
    let news_path = cfg
        .paths
        .output_dir
        .join(EmbeddingVariant::News.embeddings_file());
    let multimodal_written = returns_path.exists() && news_path.exists();
    if multimodal_written {
        let mut a = read_embeddings_tsv(&returns_path)?;
        let mut b = read_embeddings_tsv(&news_path)?;
        if cfg.analytics.normalize_before_concat {
            a = a.normalize_rows()?;
            b = b.normalize_rows()?;
        }
        let multimodal = concat_embeddings(&a, &b)?;
        write_embeddings_tsv(
            &cfg.paths
                .output_dir
                .join(EmbeddingVariant::Multimodal.embeddings_file()),
            &multimodal,
        )?;
    }
    update_manifest(cfg, "train")?;
    Ok(TrainSummary {
        trained,
        multimodal_written,
    })
}

/// Reads the persisted embedding file for a variant.
pub fn load_embeddings(cfg: &PipelineConfig, variant: EmbeddingVariant) -> Result<EmbeddingMatrix> {
    let path = cfg.paths.output_dir.join(variant.embeddings_file());
    if !path.exists() {
        return Err(Error::Validation(format!(
            "{} not found; run the train stage first",
            path.display()
        )));
    }
    read_embeddings_tsv(&path)
}

#[derive(Debug)]
pub struct KnnSummary {
    pub table: String,
    pub json_path: PathBuf,
}

pub fn run_knn(
    cfg: &PipelineConfig,
    query: &str,
    k: Option<usize>,
    variant: EmbeddingVariant,
) -> Result<KnnSummary> {
    let e = load_embeddings(cfg, variant)?;
    let k = k.unwrap_or(cfg.analytics.knn_k);
    let neighbors = knn_with_metric(&e, query, k, cfg.analytics.metric)?;
    let report = KnnReport {
        query,
        metric: cfg.analytics.metric,
        k,
        neighbors: &neighbors,
    };
    let json_path = cfg
        .paths
        .output_dir
        .join(format!("knn_{query}_{}.json", variant.name()));
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Validation(format!("cannot serialize knn report: {e}")))?;
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    update_manifest(cfg, "knn")?;
    Ok(KnnSummary {
        table: knn_table(query, cfg.analytics.metric, &neighbors),
        json_path,
    })
}

#[derive(Debug)]
pub struct GraphSummary {
    pub threshold: f64,
    pub edge_count: usize,
    pub density: f64,
    pub csv_path: PathBuf,
}

pub fn run_graph(cfg: &PipelineConfig, variant: EmbeddingVariant) -> Result<GraphSummary> {
    let e = load_embeddings(cfg, variant)?;
    let s = similarity_matrix(&e)?;
    let threshold = match cfg.analytics.density_target {
        Some(target) => density_threshold(&s, target)?,
        None => cfg.analytics.graph_threshold,
    };
    let edges = export_graph(&s, threshold)?;
    let csv_path = cfg
        .paths
        .output_dir
        .join(format!("edges_{}.csv", variant.name()));
    write_edge_list_csv(&csv_path, &edges)?;
    if cfg.analytics.gexf {
        let gexf_path = cfg
            .paths
            .output_dir
            .join(format!("edges_{}.gexf", variant.name()));
        write_edge_list_gexf(&gexf_path, &edges, e.tickers())?;
    }
    update_manifest(cfg, "graph")?;
    Ok(GraphSummary {
        threshold,
        edge_count: edges.edges.len(),
        density: edges.density(),
        csv_path,
    })
}

#[derive(Debug)]
pub struct MismatchSummary {
    pub mismatches: Vec<Mismatch>,
    pub csv_path: PathBuf,
}

pub fn run_mismatch(cfg: &PipelineConfig, variant: EmbeddingVariant) -> Result<MismatchSummary> {
    let (universe, _) = load_run_inputs(cfg)?;
    let e = load_embeddings(cfg, variant)?;
    let s = similarity_matrix(&e)?;
    let found = mismatches_by_level(
        &s,
        &universe,
        cfg.analytics.mismatch_min_sim,
        cfg.analytics.mismatch_level,
    )?;
    let csv_path = cfg
        .paths
        .output_dir
        .join(format!("mismatches_{}.csv", variant.name()));
    let mut out = String::from("ticker_a,ticker_b,similarity,sector_a,sector_b\n");
    for m in &found {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.ticker_a, m.ticker_b, m.similarity, m.sector_a, m.sector_b
        ));
    }
    std::fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
    update_manifest(cfg, "mismatch")?;
    Ok(MismatchSummary {
        mismatches: found,
        csv_path,
    })
}

#[derive(Debug)]
pub struct VariantReport {
    pub variant: EmbeddingVariant,
    pub kfold: ClassificationReport,
    pub holdout: ClassificationReport,
}

#[derive(Debug)]
pub struct ClassifySummary {
    pub reports: Vec<VariantReport>,
    pub comparison_path: Option<PathBuf>,
}

/// Runs k-fold cross-validation plus a hold-out evaluation for each selected
/// embedding variant, writing JSON and plain-text reports. Selecting all
/// three variants also writes the side-by-side comparison table.
pub fn run_classify(
    cfg: &PipelineConfig,
    variants: &[EmbeddingVariant],
) -> Result<ClassifySummary> {
    let (universe, _) = load_run_inputs(cfg)?;
    let params = cfg.classify.to_params();
    let mut reports = Vec::new();
    for &variant in variants {
        let e = load_embeddings(cfg, variant)?;
        let expected: Vec<&String> = universe.iter().map(|c| &c.ticker).collect();
        let got: Vec<&String> = e.tickers().iter().collect();
        if expected != got {
            return Err(Error::Validation(format!(
                "{} embeddings and universe.csv disagree on company ordering",
                variant.name()
            )));
        }
        let data = Dataset::from_embeddings(&e, &universe)?;
        let kfold = kfold_cv(&data, cfg.classify.k_folds, &params, cfg.classify.seed)?;
        let holdout = holdout_eval(&data, cfg.classify.test_fraction, &params, cfg.classify.seed)?;
        for (kind, report) in [("kfold", &kfold), ("holdout", &holdout)] {
            let base = format!("report_{kind}_{}", variant.name());
            let json = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Validation(format!("cannot serialize report: {e}")))?;
            let json_path = cfg.paths.output_dir.join(format!("{base}.json"));
            std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
            let txt_path = cfg.paths.output_dir.join(format!("{base}.txt"));
            std::fs::write(&txt_path, format_report(report))
                .map_err(|e| Error::io(&txt_path, e))?;
        }
        reports.push(VariantReport {
            variant,
            kfold,
            holdout,
        });
    }

    let comparison_path = if variants.len() > 1 {
        let path = cfg.paths.output_dir.join("comparison.csv");
        let mut out = String::from("model,precision,recall,f1,accuracy\n");
        for r in &reports {
            out.push_str(&format!(
                "{},{:.4},{:.4},{:.4},{:.4}\n",
                r.variant.name(),
                r.kfold.weighted_avg.precision,
                r.kfold.weighted_avg.recall,
                r.kfold.weighted_avg.f1,
                r.kfold.accuracy
            ));
        }
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        Some(path)
    } else {
        None
    };
    update_manifest(cfg, "classify")?;
    Ok(ClassifySummary {
        reports,
        comparison_path,
    })
}

/// Generates a synthetic dataset under `out_dir`.
pub fn run_synth(spec: &SyntheticSpec, out_dir: &Path) -> Result<SynthPaths> {
    let data = generate(spec)?;
    write_files(&data, out_dir)
}
