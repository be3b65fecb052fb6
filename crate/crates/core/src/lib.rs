//! Multimodal company embeddings from market data.
//!
//! Trains dense company representations from two data modalities --
//! co-movement in daily returns and co-mentions in financial news -- using a
//! shallow tied-weight softmax model, then applies the embeddings to related
//! company retrieval, similarity-graph export, high-similarity mismatch
//! analysis and supervised industry classification.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`corpus`]: price/news/label ingestion and universe construction
//! - [`context_gen`]: target:context training sets from returns and articles
//! - [`embedder`]: embedding training and concatenation
//! - [`analytics`]: cosine kNN, similarity graphs, mismatch detection
//! - [`classifier`]: SMOTE, linear one-vs-rest SVM, cross-validation, metrics
//! - [`synth`]: seeded synthetic datasets with planted sector structure
//! - [`config`] / [`pipeline`]: declarative run configuration and stage drivers

pub mod analytics;
pub mod classifier;
pub mod config;
pub mod context_gen;
pub mod corpus;
pub mod embedder;
mod error;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
