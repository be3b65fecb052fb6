//! `sector-embed`: multimodal company embeddings from historical returns and
//! financial news, with retrieval, graph export, mismatch analysis and
//! industry classification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sector_embed_core::config::PipelineConfig;
use sector_embed_core::pipeline::{
    run_classify, run_contexts, run_graph, run_ingest, run_knn, run_mismatch, run_synth,
    run_train, EmbeddingVariant, TrainModality,
};
use sector_embed_core::synth::SyntheticSpec;
use sector_embed_core::Error;

#[derive(Parser)]
#[command(name = "sector-embed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Pipeline config JSON
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. --set train_returns.seed=9 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig, Error> {
        PipelineConfig::load(&self.config, &self.set)
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum ModalityArg {
    Returns,
    News,
    #[default]
    Both,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum VariantArg {
    Returns,
    News,
    #[default]
    Multimodal,
}

impl From<VariantArg> for EmbeddingVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Returns => EmbeddingVariant::Returns,
            VariantArg::News => EmbeddingVariant::News,
            VariantArg::Multimodal => EmbeddingVariant::Multimodal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum ClassifyArg {
    Returns,
    News,
    Multimodal,
    #[default]
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Load prices, labels and news, apply the inclusion filter, and persist
    /// the universe
    Ingest(ConfigArgs),
    /// Generate target:context training sets for both modalities
    Contexts(ConfigArgs),
    /// Train embeddings and refresh the multimodal concatenation
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t)]
        modality: ModalityArg,
    },
    /// Rank the nearest neighbors of a query company
    Knn {
        #[command(flatten)]
        config: ConfigArgs,
        /// Query ticker
        query: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        embedding: VariantArg,
    },
    /// Export the thresholded similarity graph as an edge list
    Graph {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t)]
        embedding: VariantArg,
    },
    /// List high-similarity pairs whose sector labels disagree
    Mismatch {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t)]
        embedding: VariantArg,
    },
    /// Cross-validated industry classification from the embeddings
    Classify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t)]
        embedding: ClassifyArg,
    },
    /// Generate a synthetic dataset with planted sector structure
    Synth {
        /// Directory for prices.csv, news.jsonl and labels.csv
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        sectors: usize,
        #[arg(long, default_value_t = 10)]
        companies_per_sector: usize,
        #[arg(long, default_value_t = 250)]
        days: usize,
        #[arg(long, default_value_t = 400)]
        articles: usize,
        /// Pairwise correlation of same-sector returns, in [0, 1)
        #[arg(long, default_value_t = 0.9)]
        return_correlation: f64,
        /// Probability an article draws all companies from one sector
        #[arg(long, default_value_t = 0.9)]
        co_mention_bias: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "config" => 2,
        "parse" => 3,
        "validation" => 4,
        "io" => 5,
        "not-found" => 6,
        _ => 7,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Ingest(config) => {
            let cfg = config.load()?;
            let summary = run_ingest(&cfg)?;
            println!("universe: {} companies", summary.universe_size);
            println!("sector distribution:");
            for (sector, count) in &summary.sector_distribution {
                println!("  {sector}: {count}");
            }
            println!(
                "articles kept: {} (skipped {})",
                summary.articles_kept, summary.articles_skipped
            );
            for t in &summary.excluded_price_tickers {
                println!("warning: {t} excluded for incomplete pricing data");
            }
            for (t, reason) in &summary.dropped_companies {
                println!("warning: {t} dropped: {reason}");
            }
        }
        Command::Contexts(config) => {
            let cfg = config.load()?;
            let summary = run_contexts(&cfg)?;
            println!("returns context sets: {}", summary.returns_sets);
            println!("news context sets: {}", summary.news_sets);
            println!("IQR retention: {:.1}%", 100.0 * summary.iqr_retention);
        }
        Command::Train { config, modality } => {
            let cfg = config.load()?;
            let modality = match modality {
                ModalityArg::Returns => TrainModality::Returns,
                ModalityArg::News => TrainModality::News,
                ModalityArg::Both => TrainModality::Both,
            };
            let summary = run_train(&cfg, modality)?;
            for (name, sets, loss) in &summary.trained {
                println!("{name}: trained on {sets} sets, final mean loss {loss:.4}");
            }
            if summary.multimodal_written {
                println!("multimodal embeddings written");
            }
        }
        Command::Knn {
            config,
            query,
            k,
            embedding,
        } => {
            let cfg = config.load()?;
            let summary = run_knn(&cfg, &query, k, embedding.into())?;
            print!("{}", summary.table);
            println!("written: {}", summary.json_path.display());
        }
        Command::Graph { config, embedding } => {
            let cfg = config.load()?;
            let summary = run_graph(&cfg, embedding.into())?;
            println!(
                "{} edges above threshold {:.4} (density {:.2}%)",
                summary.edge_count,
                summary.threshold,
                100.0 * summary.density
            );
            println!("written: {}", summary.csv_path.display());
        }
        Command::Mismatch { config, embedding } => {
            let cfg = config.load()?;
            let summary = run_mismatch(&cfg, embedding.into())?;
            println!("{} high-similarity mismatches", summary.mismatches.len());
            for m in summary.mismatches.iter().take(20) {
                println!(
                    "  {} ({}) ~ {} ({}): {:.3}",
                    m.ticker_a, m.sector_a, m.ticker_b, m.sector_b, m.similarity
                );
            }
            println!("written: {}", summary.csv_path.display());
        }
        Command::Classify { config, embedding } => {
            let cfg = config.load()?;
            let variants: Vec<EmbeddingVariant> = match embedding {
                ClassifyArg::Returns => vec![EmbeddingVariant::Returns],
                ClassifyArg::News => vec![EmbeddingVariant::News],
                ClassifyArg::Multimodal => vec![EmbeddingVariant::Multimodal],
                ClassifyArg::All => vec![
                    EmbeddingVariant::Returns,
                    EmbeddingVariant::News,
                    EmbeddingVariant::Multimodal,
                ],
            };
            let summary = run_classify(&cfg, &variants)?;
            for report in &summary.reports {
                println!(
                    "{}: k-fold accuracy {:.1}%, hold-out accuracy {:.1}%",
                    report.variant.name(),
                    100.0 * report.kfold.accuracy,
                    100.0 * report.holdout.accuracy
                );
            }
            if let Some(path) = &summary.comparison_path {
                println!("comparison written: {}", path.display());
            }
        }
        Command::Synth {
            out,
            sectors,
            companies_per_sector,
            days,
            articles,
            return_correlation,
            co_mention_bias,
            seed,
        } => {
            let spec = SyntheticSpec {
                n_sectors: sectors,
                companies_per_sector,
                n_days: days,
                n_articles: articles,
                intra_sector_return_correlation: return_correlation,
                co_mention_bias,
                seed,
            };
            let paths = run_synth(&spec, &out)?;
            println!("written: {}", paths.prices.display());
            println!("written: {}", paths.news.display());
            println!("written: {}", paths.labels.display());
        }
    }
    Ok(())
}
