//! Stratified cross-validation and hold-out evaluation.
//!
//! SMOTE only ever runs on the training split of a fold; validation rows are
//! taken from the original data before any oversampling, so synthetic points
//! cannot leak into evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    report_metrics, smote, train_linear_svm, ClassificationReport, Dataset, SvmParams,
};
use crate::{Error, Result};

/// Everything a cross-validated classification run needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub use_smote: bool,
    pub smote_k_neighbors: usize,
    pub svm: SvmParams,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            use_smote: true,
            smote_k_neighbors: 5,
            svm: SvmParams::default(),
        }
    }
}

/// Stratified fold assignment from a seeded shuffle.
///
/// Indices are grouped by class, each class is shuffled, and the
/// concatenation is dealt round-robin into `k` folds, which spreads every
/// class as evenly as the counts allow. With `k` equal to the number of rows
/// this degenerates to leave-one-out. Every index lands in exactly one fold.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if labels.is_empty() {
        return Err(Error::Validation("cannot fold an empty dataset".into()));
    }
    if k < 2 || k > labels.len() {
        return Err(Error::Validation(format!(
            "k must be in 2..={}, got {k}",
            labels.len()
        )));
    }
    let num_classes = labels.iter().max().unwrap() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut position = 0usize;
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for index in members {
            folds[position % k].push(index);
            position += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Pooled out-of-fold predictions, aligned with the dataset rows.
///
/// SMOTE (when enabled) is applied inside each fold to the training split
/// only.
pub fn kfold_predictions(
    data: &Dataset,
    k: usize,
    params: &ClassifyParams,
    seed: u64,
) -> Result<Vec<usize>> {
    let folds = stratified_folds(&data.labels, k, seed)?;
    let mut predictions = vec![usize::MAX; data.num_rows()];
    for (fold_index, val_indices) in folds.iter().enumerate() {
        let train_indices: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold_index)
            .flat_map(|(_, fold)| fold.iter().copied())
            .collect();
        debug_assert!(val_indices.iter().all(|i| !train_indices.contains(i)));

        let mut train_data = data.subset(&train_indices);
        if params.use_smote {
            train_data = smote(
                &train_data,
                params.smote_k_neighbors,
                seed.wrapping_add(fold_index as u64 + 1),
            )?;
        }
        let model = train_linear_svm(&train_data, &params.svm)?;
        for &i in val_indices {
            predictions[i] = crate::classifier::predict(&model, &data.features[i])?;
        }
    }
    debug_assert!(predictions.iter().all(|&p| p != usize::MAX));
    Ok(predictions)
}

/// Stratified k-fold cross-validation: predictions are pooled across folds,
/// then a single report is computed.
pub fn kfold_cv(
    data: &Dataset,
    k: usize,
    params: &ClassifyParams,
    seed: u64,
) -> Result<ClassificationReport> {
    let predictions = kfold_predictions(data, k, params, seed)?;
    report_metrics(&data.labels, &predictions, &data.class_names)
}

/// Stratified train/test split. Every class contributes at least one row to
/// each side, which requires at least 2 rows per class.
pub fn holdout_split(
    labels: &[usize],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::Validation(format!(
                "class {class} has {} row(s); stratified hold-out needs at least 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_test = ((test_fraction * members.len() as f64).round() as usize)
            .clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Hold-out evaluation: stratified split, SMOTE (when enabled) plus SVM
/// training on the remainder, per-class breakdown on the held-out rows.
pub fn holdout_eval(
    data: &Dataset,
    test_fraction: f64,
    params: &ClassifyParams,
    seed: u64,
) -> Result<ClassificationReport> {
    let (train_indices, test_indices) = holdout_split(&data.labels, test_fraction, seed)?;
    let mut train_data = data.subset(&train_indices);
    if params.use_smote {
        train_data = smote(&train_data, params.smote_k_neighbors, seed.wrapping_add(1))?;
    }
    let model = train_linear_svm(&train_data, &params.svm)?;
    let mut y_true = Vec::with_capacity(test_indices.len());
    let mut y_pred = Vec::with_capacity(test_indices.len());
    for &i in &test_indices {
        y_true.push(data.labels[i]);
        y_pred.push(crate::classifier::predict(&model, &data.features[i])?);
    }
    report_metrics(&y_true, &y_pred, &data.class_names)
}
