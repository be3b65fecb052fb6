//! Precision/recall/F1 reporting.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedAvg {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class precision/recall/F1 with weighted averages and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub weighted_avg: WeightedAvg,
    pub accuracy: f64,
}

/// Computes the report from pooled predictions.
///
/// Zero-denominator conventions: precision and recall are 0 when their
/// denominator is 0, and F1 is 0 when precision + recall is 0. Weighted
/// averages use class supports as weights.
pub fn report_metrics(
    y_true: &[usize],
    y_pred: &[usize],
    class_names: &[String],
) -> Result<ClassificationReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Validation(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Validation("empty evaluation set".into()));
    }
    let k = class_names.len();
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&l| l >= k) {
        return Err(Error::Validation(format!(
            "label {bad} out of range for {k} classes"
        )));
    }

    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    let mut correct = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == p {
            tp[t] += 1;
            correct += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }

    let mut per_class = Vec::with_capacity(k);
    let mut weighted = (0.0, 0.0, 0.0);
    for c in 0..k {
        let support = tp[c] + fn_[c];
        let precision = ratio(tp[c], tp[c] + fp[c]);
        let recall = ratio(tp[c], support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        weighted.0 += precision * support as f64;
        weighted.1 += recall * support as f64;
        weighted.2 += f1 * support as f64;
        per_class.push(ClassMetrics {
            class_name: class_names[c].clone(),
            precision,
            recall,
            f1,
            support,
        });
    }
    let n = y_true.len() as f64;
    Ok(ClassificationReport {
        per_class,
        weighted_avg: WeightedAvg {
            precision: weighted.0 / n,
            recall: weighted.1 / n,
            f1: weighted.2 / n,
        },
        accuracy: correct as f64 / n,
    })
}

fn ratio(num: usize, denom: usize) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Aligned plain-text table: one row per class, then the weighted averages
/// and the overall accuracy.
pub fn format_report(report: &ClassificationReport) -> String {
    let name_width = report
        .per_class
        .iter()
        .map(|m| m.class_name.len())
        .chain(["Overall Accuracy".len()])
        .max()
        .unwrap_or(16);
    let mut out = format!(
        "{:<w$}  {:>9}  {:>7}  {:>8}  {:>7}\n",
        "Industry Class",
        "Precision",
        "Recall",
        "F1-Score",
        "Support",
        w = name_width
    );
    for m in &report.per_class {
        out.push_str(&format!(
            "{:<w$}  {:>9.2}  {:>7.2}  {:>8.2}  {:>7}\n",
            m.class_name,
            m.precision,
            m.recall,
            m.f1,
            m.support,
            w = name_width
        ));
    }
    let total: usize = report.per_class.iter().map(|m| m.support).sum();
    out.push_str(&format!(
        "{:<w$}  {:>9.2}  {:>7.2}  {:>8.2}  {:>7}\n",
        "Weighted Avg",
        report.weighted_avg.precision,
        report.weighted_avg.recall,
        report.weighted_avg.f1,
        total,
        w = name_width
    ));
    out.push_str(&format!(
        "{:<w$}  {:>9}  {:>7}  {:>8.2}\n",
        "Overall Accuracy",
        "",
        "",
        report.accuracy,
        w = name_width
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("class{c}")).collect()
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let y = vec![0, 1, 2, 1, 0];
        let report = report_metrics(&y, &y, &names(3)).unwrap();
        assert_eq!(report.accuracy, 1.0);
        for m in &report.per_class {
            assert_eq!(m.precision, 1.0);
            assert_eq!(m.recall, 1.0);
            assert_eq!(m.f1, 1.0);
        }
        assert_eq!(report.weighted_avg.f1, 1.0);
    }

    #[test]
    fn worked_two_class_example() {
        let report = report_metrics(&[0, 0, 1, 1], &[0, 1, 1, 1], &names(2)).unwrap();
        let c0 = &report.per_class[0];
        assert!((c0.precision - 1.0).abs() < 1e-12);
        assert!((c0.recall - 0.5).abs() < 1e-12);
        assert!((c0.f1 - 2.0 / 3.0).abs() < 1e-12);
        let c1 = &report.per_class[1];
        assert!((c1.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((c1.recall - 1.0).abs() < 1e-12);
        assert!((c1.f1 - 0.8).abs() < 1e-12);
        assert!((report.accuracy - 0.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_single_class_predictor() {
        let report = report_metrics(&[0, 0, 1, 1], &[0, 0, 0, 0], &names(2)).unwrap();
        assert_eq!(report.accuracy, 0.5);
        assert_eq!(report.per_class[0].recall, 1.0);
        assert_eq!(report.per_class[1].recall, 0.0);
        assert_eq!(report.per_class[1].precision, 0.0);
        assert_eq!(report.per_class[1].f1, 0.0);
    }

    #[test]
    fn accuracy_equals_weighted_recall() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(5..40);
            let k = rng.gen_range(2..6);
            let y_true: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let y_pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let report = report_metrics(&y_true, &y_pred, &names(k)).unwrap();
            assert!((report.accuracy - report.weighted_avg.recall).abs() < 1e-12);
            let total: usize = report.per_class.iter().map(|m| m.support).sum();
            assert_eq!(total, n);
        }
    }

    /// Hand-coded confusion-matrix oracle for random cases.
    #[test]
    fn matches_confusion_matrix_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let n = rng.gen_range(1..=30);
            let k = rng.gen_range(2..=5);
            let y_true: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let y_pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let report = report_metrics(&y_true, &y_pred, &names(k)).unwrap();

            let mut confusion = vec![vec![0usize; k]; k];
            for (&t, &p) in y_true.iter().zip(&y_pred) {
                confusion[t][p] += 1;
            }
            for c in 0..k {
                let tp = confusion[c][c];
                let fp: usize = (0..k).filter(|&t| t != c).map(|t| confusion[t][c]).sum();
                let fn_: usize = (0..k).filter(|&p| p != c).map(|p| confusion[c][p]).sum();
                let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
                let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
                assert!((report.per_class[c].precision - precision).abs() < 1e-12);
                assert!((report.per_class[c].recall - recall).abs() < 1e-12);
                assert_eq!(report.per_class[c].support, tp + fn_);
            }
            let acc = (0..k).map(|c| confusion[c][c]).sum::<usize>() as f64 / n as f64;
            assert!((report.accuracy - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn table_has_the_holdout_breakdown_shape() {
        let report = report_metrics(&[0, 0, 1, 1], &[0, 1, 1, 1], &names(2)).unwrap();
        let table = format_report(&report);
        assert!(table.contains("Industry Class"));
        assert!(table.contains("Weighted Avg"));
        assert!(table.contains("Overall Accuracy"));
        assert_eq!(table.lines().count(), 5);
    }
}
