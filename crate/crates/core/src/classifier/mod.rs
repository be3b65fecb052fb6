//! Supervised industry classification from embeddings: SMOTE balancing, a
//! linear one-vs-rest maximum-margin classifier, stratified cross-validation
//! and per-class reporting.

mod cv;
mod metrics;
mod smote;
mod svm;

pub use cv::{
    holdout_eval, holdout_split, kfold_cv, kfold_predictions, stratified_folds, ClassifyParams,
};
pub use metrics::{format_report, report_metrics, ClassMetrics, ClassificationReport, WeightedAvg};
pub use smote::{convex_residual, smote, smote_detailed, SmoteOutput, SyntheticParent};
pub use svm::{
    load_model, predict, predict_proba, save_model, train_linear_svm, train_linear_svm_detailed,
    LinearModel, SvmParams, SvmTrainOutput,
};

use crate::corpus::LabeledCompany;
use crate::embedder::EmbeddingMatrix;
use crate::{Error, Result};

/// A labeled feature matrix for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    /// Class index per row, valid for `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} feature rows for {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.is_empty() {
            return Err(Error::Validation("empty dataset".into()));
        }
        let dim = features[0].len();
        if dim == 0 || features.iter().any(|row| row.len() != dim) {
            return Err(Error::Validation("ragged or empty feature rows".into()));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Validation(format!(
                "label index {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    /// Builds a dataset from embedding rows and the companies' coarse sector
    /// labels. Class names are the sorted distinct sectors.
    pub fn from_embeddings(e: &EmbeddingMatrix, companies: &[LabeledCompany]) -> Result<Dataset> {
        let mut class_names: Vec<String> = companies.iter().map(|c| c.sector1.clone()).collect();
        class_names.sort();
        class_names.dedup();

        let mut features = Vec::with_capacity(e.num_companies());
        let mut labels = Vec::with_capacity(e.num_companies());
        for (i, ticker) in e.tickers().iter().enumerate() {
            let company = companies
                .iter()
                .find(|c| &c.ticker == ticker)
                .ok_or_else(|| Error::Validation(format!("no label for ticker {ticker}")))?;
            let class = class_names
                .iter()
                .position(|n| n == &company.sector1)
                .expect("class name built from the same companies");
            features.push(e.row(i).to_vec());
            labels.push(class);
        }
        Dataset::new(features, labels, class_names)
    }

    pub fn num_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}
