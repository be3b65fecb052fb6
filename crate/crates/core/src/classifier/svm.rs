//! Linear one-vs-rest maximum-margin classifier trained by subgradient
//! descent on the L2-regularized hinge loss.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// L2 regularization strength lambda.
    pub reg_lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    /// Seeds the small random weight initialization.
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            reg_lambda: 1e-3,
            lr: 0.01,
            epochs: 200,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !self.reg_lambda.is_finite() || self.reg_lambda <= 0.0 {
            return Err(Error::Config("reg_lambda must be positive".into()));
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::Config("svm lr must be positive".into()));
        }
        Ok(())
    }
}

/// One-vs-rest linear model: class scores are `w_k . x + b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub class_names: Vec<String>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Raw margin scores per class.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Validation(format!(
                "feature vector has {} dims, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(wv, xv)| wv * xv).sum::<f64>() + b)
            .collect())
    }
}

/// Training output with the per-class regularized-objective trace, one value
/// per epoch.
#[derive(Debug, Clone)]
pub struct SvmTrainOutput {
    pub model: LinearModel,
    pub objective_traces: Vec<Vec<f64>>,
}

pub fn train_linear_svm(data: &Dataset, params: &SvmParams) -> Result<LinearModel> {
    train_linear_svm_detailed(data, params).map(|out| out.model)
}

/// Trains K binary classifiers, one per class, by full-batch subgradient
/// descent on `lambda * ||w||^2 + (1/n) sum max(0, 1 - y_i (w.x_i + b))`.
pub fn train_linear_svm_detailed(data: &Dataset, params: &SvmParams) -> Result<SvmTrainOutput> {
    params.validate()?;
    let counts = data.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Validation(
            "training data must contain at least 2 classes".into(),
        ));
    }
    let dim = data.dim();
    let n = data.num_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut weights = Vec::with_capacity(data.num_classes());
    let mut biases = Vec::with_capacity(data.num_classes());
    let mut objective_traces = Vec::with_capacity(data.num_classes());

    for class in 0..data.num_classes() {
        let y: Vec<f64> = data
            .labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let mut w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1e-3..1e-3)).collect();
        let mut b = 0.0;
        let mut trace = Vec::with_capacity(params.epochs);

        for _ in 0..params.epochs {
            let mut grad_w: Vec<f64> = w.iter().map(|wv| 2.0 * params.reg_lambda * wv).collect();
            let mut grad_b = 0.0;
            for (x, &yi) in data.features.iter().zip(&y) {
                let margin = yi * (dot(&w, x) + b);
                if margin < 1.0 {
                    let scale = yi / n as f64;
                    for (g, xv) in grad_w.iter_mut().zip(x) {
                        *g -= scale * xv;
                    }
                    grad_b -= scale;
                }
            }
            for (wv, g) in w.iter_mut().zip(&grad_w) {
                *wv -= params.lr * g;
            }
            b -= params.lr * grad_b;
            trace.push(objective(&w, b, &data.features, &y, params.reg_lambda));
        }
        weights.push(w);
        biases.push(b);
        objective_traces.push(trace);
    }

    Ok(SvmTrainOutput {
        model: LinearModel {
            weights,
            biases,
            class_names: data.class_names.clone(),
        },
        objective_traces,
    })
}

fn objective(w: &[f64], b: f64, features: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let reg = lambda * dot(w, w);
    let hinge: f64 = features
        .iter()
        .zip(y)
        .map(|(x, &yi)| (1.0 - yi * (dot(w, x) + b)).max(0.0))
        .sum::<f64>()
        / y.len() as f64;
    reg + hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Predicted class: argmax over the margin scores, ties broken by the lowest
/// class index.
pub fn predict(model: &LinearModel, x: &[f64]) -> Result<usize> {
    let scores = model.scores(x)?;
    Ok(argmax(&scores))
}

/// Softmax over the margin scores. Always argmax-consistent with
/// [`predict`].
pub fn predict_proba(model: &LinearModel, x: &[f64]) -> Result<Vec<f64>> {
    let scores = model.scores(x)?;
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    class_names: Vec<String>,
    /// Training-config fingerprint recorded alongside the parameters.
    params: SvmParams,
}

pub fn save_model(path: &Path, model: &LinearModel, params: &SvmParams) -> Result<()> {
    let saved = SavedModel {
        weights: model.weights.clone(),
        biases: model.biases.clone(),
        class_names: model.class_names.clone(),
        params: params.clone(),
    };
    let json = serde_json::to_string_pretty(&saved)
        .map_err(|e| Error::Validation(format!("cannot serialize model: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(LinearModel, SvmParams)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let saved: SavedModel = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, 1, format!("bad model file: {e}")))?;
    Ok((
        LinearModel {
            weights: saved.weights,
            biases: saved.biases,
            class_names: saved.class_names,
        },
        saved.params,
    ))
}
