//! Declarative pipeline configuration: one JSON document, checked in full
//! before any stage runs, with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{Metric, SectorLevel};
use crate::classifier::{ClassifyParams, SvmParams};
use crate::context_gen::{ContextGenConfig, TieBreak};
use crate::corpus::{TickerPattern, DEFAULT_TICKER_PATTERN};
use crate::embedder::TrainConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub prices: PathBuf,
    pub news: PathBuf,
    pub labels: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniverseConfig {
    /// Minimum distinct articles mentioning a company for inclusion.
    pub min_mentions: usize,
    pub ticker_pattern: String,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        Self {
            min_mentions: 50,
            ticker_pattern: DEFAULT_TICKER_PATTERN.to_string(),
        }
    }
}

impl UniverseConfig {
    pub fn pattern(&self) -> Result<TickerPattern> {
        TickerPattern::new(&self.ticker_pattern)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContextsConfig {
    pub context_size: usize,
    pub iqr_filter: bool,
    pub tie_break: TieBreak,
}

impl Default for ContextsConfig {
    fn default() -> Self {
        let base = ContextGenConfig::default();
        Self {
            context_size: base.context_size,
            iqr_filter: base.iqr_filter,
            tie_break: base.tie_break,
        }
    }
}

impl ContextsConfig {
    pub fn to_gen_config(&self) -> ContextGenConfig {
        ContextGenConfig {
            context_size: self.context_size,
            iqr_filter: self.iqr_filter,
            tie_break: self.tie_break,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Defaults to `0.5 / dim` when omitted.
    pub init_scale: Option<f64>,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let base = TrainConfig::default();
        Self {
            dim: base.dim,
            learning_rate: base.learning_rate,
            epochs: base.epochs,
            seed: base.seed,
            init_scale: None,
            shuffle_each_epoch: base.shuffle_each_epoch,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed: self.seed,
            init_scale: self
                .init_scale
                .unwrap_or(0.5 / self.dim.max(1) as f64),
            shuffle_each_epoch: self.shuffle_each_epoch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticsConfig {
    /// Similarity-graph edge threshold (strict inequality).
    pub graph_threshold: f64,
    /// When set, the graph threshold is derived from this target edge
    /// density instead of `graph_threshold`.
    pub density_target: Option<f64>,
    pub knn_k: usize,
    pub metric: Metric,
    pub mismatch_min_sim: f64,
    pub mismatch_level: SectorLevel,
    /// Unit-normalize each modality's rows before concatenation.
    pub normalize_before_concat: bool,
    /// Also write a GEXF copy of the edge list.
    pub gexf: bool,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        Self {
            graph_threshold: 0.6,
            density_target: None,
            knn_k: 3,
            metric: Metric::Cosine,
            mismatch_min_sim: 0.8,
            mismatch_level: SectorLevel::Coarse,
            normalize_before_concat: false,
            gexf: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub k_folds: usize,
    pub use_smote: bool,
    pub smote_k_neighbors: usize,
    pub reg_lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub test_fraction: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let params = ClassifyParams::default();
        Self {
            k_folds: 4,
            use_smote: params.use_smote,
            smote_k_neighbors: params.smote_k_neighbors,
            reg_lambda: params.svm.reg_lambda,
            lr: params.svm.lr,
            epochs: params.svm.epochs,
            seed: 7,
            test_fraction: 0.25,
        }
    }
}

impl ClassifyConfig {
    pub fn to_params(&self) -> ClassifyParams {
        ClassifyParams {
            use_smote: self.use_smote,
            smote_k_neighbors: self.smote_k_neighbors,
            svm: SvmParams {
                reg_lambda: self.reg_lambda,
                lr: self.lr,
                epochs: self.epochs,
                seed: self.seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    #[serde(default)]
    pub universe: UniverseConfig,
    #[serde(default)]
    pub contexts: ContextsConfig,
    #[serde(default)]
    pub train_returns: TrainSection,
    #[serde(default)]
    pub train_news: TrainSection,
    #[serde(default)]
    pub analytics: AnalyticsConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
}

impl PipelineConfig {
    /// Loads and fully validates a config file, applying dotted-key
    /// overrides (e.g. `train_returns.seed=9`) before type checking.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{} is not valid JSON: {e}", path.display())))?;
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let config: PipelineConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks field bounds and that every referenced input path resolves.
    pub fn validate(&self) -> Result<()> {
        for (name, path) in [
            ("paths.prices", &self.paths.prices),
            ("paths.news", &self.paths.news),
            ("paths.labels", &self.paths.labels),
        ] {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "{name} does not exist: {}",
                    path.display()
                )));
            }
        }
        self.universe.pattern()?;
        if self.contexts.context_size == 0 {
            return Err(Error::Config("contexts.context_size must be positive".into()));
        }
        self.train_returns.to_train_config().validate()?;
        self.train_news.to_train_config().validate()?;
        if !(-1.0..=1.0).contains(&self.analytics.graph_threshold) {
            return Err(Error::Config("analytics.graph_threshold must be in [-1, 1]".into()));
        }
        if let Some(d) = self.analytics.density_target {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::Config("analytics.density_target must be in (0, 1]".into()));
            }
        }
        if !(-1.0..=1.0).contains(&self.analytics.mismatch_min_sim) {
            return Err(Error::Config("analytics.mismatch_min_sim must be in [-1, 1]".into()));
        }
        if self.analytics.knn_k == 0 {
            return Err(Error::Config("analytics.knn_k must be positive".into()));
        }
        if self.classify.k_folds < 2 {
            return Err(Error::Config("classify.k_folds must be at least 2".into()));
        }
        if !(self.classify.test_fraction > 0.0 && self.classify.test_fraction < 1.0) {
            return Err(Error::Config("classify.test_fraction must be in (0, 1)".into()));
        }
        self.to_params_checked()?;
        Ok(())
    }

    fn to_params_checked(&self) -> Result<ClassifyParams> {
        let params = self.classify.to_params();
        params.svm.validate()?;
        if params.smote_k_neighbors == 0 {
            return Err(Error::Config("classify.smote_k_neighbors must be positive".into()));
        }
        Ok(params)
    }

    /// SHA-256 of the fully resolved config, hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Applies one `dotted.key=value` override to the raw JSON document. The
/// value is parsed as JSON when possible and treated as a string otherwise.
fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<()> {
    let (key, raw) = entry.split_once('=').ok_or_else(|| {
        Error::Config(format!("override {entry:?} must look like path.to.key=value"))
    })?;
    let value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| {
            Error::Config(format!("override {key:?}: {part:?} is not an object"))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_inputs(dir: &Path) -> (PathBuf, String) {
        std::fs::write(dir.join("prices.csv"), "date,ticker,close\n").unwrap();
        std::fs::write(dir.join("news.jsonl"), "").unwrap();
        std::fs::write(dir.join("labels.csv"), "ticker,name,sector1,sector2\n").unwrap();
        let config_path = dir.join("config.json");
        let body = format!(
            r#"{{
  "paths": {{
    "prices": "{0}/prices.csv",
    "news": "{0}/news.jsonl",
    "labels": "{0}/labels.csv",
    "output_dir": "{0}/out"
  }},
  "universe": {{ "min_mentions": 2 }}
}}"#,
            dir.display()
        );
        (config_path, body)
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let (path, body) = write_inputs(dir.path());
        std::fs::write(&path, body).unwrap();
        let config = PipelineConfig::load(&path, &[]).unwrap();
        assert_eq!(config.universe.min_mentions, 2);
        assert_eq!(config.contexts.context_size, 3);
        assert_eq!(config.train_returns.dim, 20);
        assert_eq!(config.classify.k_folds, 4);
        assert!((config.train_news.to_train_config().init_scale - 0.025).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_fail_fast() {
        let dir = tempfile::tempdir().unwrap();
        let (path, body) = write_inputs(dir.path());
        std::fs::write(&path, body.replace("min_mentions", "min_menshuns")).unwrap();
        let err = PipelineConfig::load(&path, &[]).unwrap_err();
        assert_eq!(err.category(), "config");
        assert!(err.to_string().contains("min_menshuns"));
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let dir = tempfile::tempdir().unwrap();
        let (path, body) = write_inputs(dir.path());
        std::fs::write(&path, body).unwrap();
        let config = PipelineConfig::load(
            &path,
            &[
                "train_returns.seed=99".to_string(),
                "contexts.iqr_filter=false".to_string(),
                "analytics.metric=dot".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(config.train_returns.seed, 99);
        assert!(!config.contexts.iqr_filter);
        assert_eq!(config.analytics.metric, Metric::Dot);
    }

    #[test]
    fn missing_input_path_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let (path, body) = write_inputs(dir.path());
        std::fs::write(&path, body).unwrap();
        std::fs::remove_file(dir.path().join("news.jsonl")).unwrap();
        let err = PipelineConfig::load(&path, &[]).unwrap_err();
        assert!(err.to_string().contains("paths.news"));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let dir = tempfile::tempdir().unwrap();
        let (path, body) = write_inputs(dir.path());
        std::fs::write(&path, body).unwrap();
        let a = PipelineConfig::load(&path, &[]).unwrap();
        let b = PipelineConfig::load(&path, &["classify.seed=8".to_string()]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), PipelineConfig::load(&path, &[]).unwrap().fingerprint());
    }
}
